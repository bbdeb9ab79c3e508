// Command-line front end: every pipeline stage reads and writes the file
// formats owned by the library modules.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "valsteer/edge_list.hpp"
#include "valsteer/export.hpp"
#include "valsteer/metrics.hpp"
#include "valsteer/pc.hpp"
#include "valsteer/runner.hpp"
#include "valsteer/synthlab.hpp"

using namespace valsteer;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << content;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct IngestArgs {
    std::string catalog_path, responses_path, out_path;
    int min_questions = 0;
};

void cmd_ingest(const IngestArgs& args) {
    Catalog catalog = load_catalog(args.catalog_path);
    if (args.min_questions > 0) catalog = filter_values(catalog, args.min_questions);
    const auto records = load_responses(args.responses_path);
    check_responses(records, catalog);
    std::cerr << "ingested " << records.size() << " records over " << catalog.values().size()
              << " values\n";
    if (!args.out_path.empty()) save_responses(records, args.out_path);
}

struct ScoreArgs {
    std::string catalog_path, responses_path, split_path, out_path, csv_path, split_out;
    std::uint64_t seed = 0;
    bool have_seed = false;
    bool all_questions = false;
    std::string roles_path;
};

void cmd_score(const ScoreArgs& args) {
    const Catalog catalog = load_catalog(args.catalog_path);
    const auto records = load_responses(args.responses_path);
    check_responses(records, catalog);
    DatasetSplit split;
    if (!args.split_path.empty()) {
        split = load_split(args.split_path);
    } else if (args.have_seed) {
        if (args.roles_path.empty())
            throw InvalidParameter("--seed needs --roles to derive a split");
        split = split_dataset(catalog, load_roles(args.roles_path), args.seed);
        if (!args.split_out.empty()) save_split(split, args.split_out);
    } else {
        throw InvalidParameter("provide --split FILE or --seed N with --roles FILE");
    }
    const OrientationMatrix matrix = build_matrix(records, catalog, split, args.all_questions);
    save_matrix(matrix, args.out_path);
    if (!args.csv_path.empty()) write_file(args.csv_path, matrix_to_csv(matrix));
    std::cerr << "scored " << matrix.rows().size() << " conditions x "
              << matrix.columns().size() << " values\n";
}

struct DiscoverArgs {
    std::string matrix_path, out_path;
    double alpha = 0.05;
    int max_cond = 3;
    bool as_dag = false;
    std::string ci_test = "fisher_z";
    int n_perm = 1000;
};

void cmd_discover(const DiscoverArgs& args) {
    const OrientationMatrix matrix = load_matrix(args.matrix_path);
    PcConfig config;
    config.alpha = args.alpha;
    config.max_cond_size = args.max_cond;
    config.n_perm = args.n_perm;
    if (args.ci_test == "permutation")
        config.ci_test = PcConfig::CiTest::permutation;
    else if (args.ci_test != "fisher_z")
        throw InvalidParameter("--ci-test must be fisher_z or permutation");
    CausalGraph graph = pc_discover(matrix, config);
    if (args.as_dag) graph = extend_to_dag_or_best_effort(graph);
    save_graph(graph, args.out_path);
    std::cerr << "discovered " << graph.directed_edges.size() << " directed and "
              << graph.undirected_edges.size() << " undirected edges\n";
}

void cmd_reduce(const std::string& graph_path, const std::string& out_path) {
    CausalGraph graph = load_graph(graph_path);
    if (graph.kind == CausalGraph::Kind::cpdag) graph = extend_to_dag_or_best_effort(graph);
    const CausalGraph reduced = transitive_reduction(graph);
    save_graph(reduced, out_path);
    std::cerr << "reduced to " << reduced.directed_edges.size() << " edges\n";
}

struct MetricsArgs {
    std::string matrix_path, graph_path, baseline, mode = "role", out_path, md_path;
    double epsilon = 0.0;
    bool sae_any_role = false;
};

MetricOptions options_of(const MetricsArgs& args) {
    MetricOptions opts;
    opts.epsilon = args.epsilon;
    opts.sae_any_role = args.sae_any_role;
    return opts;
}

void cmd_metrics(const MetricsArgs& args) {
    const OrientationMatrix matrix = load_matrix(args.matrix_path);
    CausalGraph graph = load_graph(args.graph_path);
    if (graph.kind == CausalGraph::Kind::cpdag) graph = extend_to_dag_or_best_effort(graph);
    const MetricReport report = aggregate_report(graph, matrix, args.baseline,
                                                 change_mode_from_string(args.mode),
                                                 options_of(args));
    write_file(args.out_path, report_to_json(report));
    if (!args.md_path.empty()) write_file(args.md_path, report_to_markdown(report));
    if (report.macro_expected_accuracy)
        std::cerr << "macro expected accuracy "
                  << to_double(*report.macro_expected_accuracy) << "\n";
    if (report.macro_unexpected_frequency)
        std::cerr << "macro unexpected frequency "
                  << to_double(*report.macro_unexpected_frequency) << "\n";
}

void cmd_predict(const std::string& graph_path, const std::string& target) {
    CausalGraph graph = load_graph(graph_path);
    if (graph.kind == CausalGraph::Kind::cpdag) graph = extend_to_dag_or_best_effort(graph);
    std::cout << "steering " << target << "\nexpected to move:";
    for (const auto& v : successors(graph, target)) std::cout << " " << v;
    std::cout << "\nexpected to hold:";
    for (const auto& v : nonsuccessors(graph, target)) std::cout << " " << v;
    std::cout << "\n";
}

struct CompareArgs {
    std::string matrix_path, graph_path, ref_path, baseline, mode = "role", out_path, md_path;
    double epsilon = 0.0;
};

void cmd_compare(const CompareArgs& args) {
    const OrientationMatrix matrix = load_matrix(args.matrix_path);
    CausalGraph ours = load_graph(args.graph_path);
    if (ours.kind == CausalGraph::Kind::cpdag) ours = extend_to_dag_or_best_effort(ours);
    const CausalGraph reference = parse_edge_list(read_text(args.ref_path));
    MetricOptions opts;
    opts.epsilon = args.epsilon;
    const PairedReport paired = compare_graphs(ours, reference, matrix, args.baseline,
                                               change_mode_from_string(args.mode), opts);
    write_file(args.out_path, paired_report_to_json(paired));
    if (!args.md_path.empty()) write_file(args.md_path, paired_report_to_markdown(paired));
}

struct SimulateArgs {
    std::uint64_t seed = 0;
    std::size_t nodes = 17;
    double degree = 2.0;
    std::size_t roles = 101;
    std::size_t features = 25;
    int questions = 20;
    bool independent_rows = false;
    std::string matrix_out, truth_out, scm_out;
};

void cmd_simulate(const SimulateArgs& args) {
    ScmSpec spec = make_world(args.nodes, args.degree, args.seed);
    spec.question_count = args.questions;
    const auto conditions = args.independent_rows
                                ? independent_cross_conditions(spec, args.roles, args.features)
                                : cross_conditions(spec, args.roles, args.features);
    const OrientationMatrix matrix = sample_dataset(spec, conditions);
    save_matrix(matrix, args.matrix_out);
    if (!args.truth_out.empty()) save_graph(spec.dag, args.truth_out);
    if (!args.scm_out.empty()) write_file(args.scm_out, serialize_scm(spec));
    std::cerr << "sampled " << matrix.rows().size() << " rows over "
              << matrix.columns().size() << " values\n";
}

struct RunArgs {
    std::string catalog_path, roles_path, split_path, out_path, manifest_path;
    std::string endpoint, model, api_key_env, judge_endpoint, judge_model;
    std::uint64_t seed = 0;
    bool have_seed = false;
    bool stub = false;
    std::uint64_t stub_seed = 0;
    int max_retries = 2;
    int concurrency = 4;
    bool judge_thoughts = false;
    std::string conditions_path; // optional instruction/role condition list (JSON array)
};

std::vector<SteeringCondition> load_condition_list(const std::string& path) {
    const nlohmann::json j = nlohmann::json::parse(read_text(path));
    if (!j.is_array()) throw ParseError("conditions file must be a JSON array");
    std::vector<SteeringCondition> out;
    for (const auto& jc : j) out.push_back(condition_from_json(jc));
    return out;
}

void cmd_run(const RunArgs& args) {
    const Catalog catalog = load_catalog(args.catalog_path);
    const RoleSet roles = load_roles(args.roles_path);
    DatasetSplit split;
    if (!args.split_path.empty()) {
        split = load_split(args.split_path);
    } else if (args.have_seed) {
        split = split_dataset(catalog, roles, args.seed);
    } else {
        throw InvalidParameter("provide --split FILE or --seed N");
    }

    std::vector<SteeringCondition> conditions;
    if (!args.conditions_path.empty()) {
        conditions = load_condition_list(args.conditions_path);
    } else {
        for (const auto& r : roles.roles())
            conditions.push_back(SteeringCondition::make_role(r.id));
    }

    std::unique_ptr<QuestionnaireBackend> backend;
    if (args.stub) {
        backend = make_stub_backend(StubProfile{}, args.stub_seed);
    } else {
        if (args.endpoint.empty()) throw InvalidParameter("--endpoint URL or --stub is required");
        EndpointConfig config;
        config.base_url = args.endpoint;
        config.model_name = args.model;
        config.api_key_env = args.api_key_env;
        if (!args.judge_endpoint.empty()) {
            EndpointConfig judge = config;
            judge.base_url = args.judge_endpoint;
            if (!args.judge_model.empty()) judge.model_name = args.judge_model;
            backend = make_http_backend(config, judge);
        } else {
            backend = make_http_backend(config);
        }
    }

    RunOptions options;
    options.max_retries = args.max_retries;
    options.max_concurrency = args.concurrency;
    options.judge_thoughts = args.judge_thoughts;
    const RunResult result = run_questionnaire(*backend, catalog, roles, conditions, split,
                                               default_template(), options);
    save_responses(result.records, args.out_path);
    if (!args.manifest_path.empty())
        write_file(args.manifest_path, serialize_manifest(result.manifest));
    std::cerr << "collected " << result.records.size() << " records ("
              << result.manifest.judge_calls << " judge calls, "
              << result.manifest.total_retries << " retries)\n";
}

struct ExportArgs {
    std::string graph_path, report_path, dot_path, md_path, edges_path;
};

void cmd_export(const ExportArgs& args) {
    if (!args.graph_path.empty()) {
        const CausalGraph graph = load_graph(args.graph_path);
        if (!args.dot_path.empty()) write_file(args.dot_path, export_dot(graph));
        if (!args.edges_path.empty()) write_file(args.edges_path, emit_edge_list(graph));
    }
    if (!args.report_path.empty() && !args.md_path.empty()) {
        const MetricReport report = report_from_json(read_text(args.report_path));
        write_file(args.md_path, report_to_markdown(report));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal value-graph toolkit: score questionnaires, discover graphs, audit steering"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* cmd_i = app.add_subcommand("ingest", "validate a catalog and a response set");
    cmd_i->add_option("--catalog", ingest.catalog_path)->required();
    cmd_i->add_option("--responses", ingest.responses_path)->required();
    cmd_i->add_option("--out", ingest.out_path, "rewrite records canonically");
    cmd_i->add_option("--min-questions", ingest.min_questions,
                      "drop values with at most this many questions");

    ScoreArgs score;
    auto* cmd_s = app.add_subcommand("score", "build an orientation matrix from labeled records");
    cmd_s->add_option("--catalog", score.catalog_path)->required();
    cmd_s->add_option("--responses", score.responses_path)->required();
    cmd_s->add_option("--split", score.split_path);
    cmd_s->add_option("--roles", score.roles_path);
    cmd_s->add_option("--seed", score.seed)->each([&](const std::string&) { score.have_seed = true; });
    cmd_s->add_option("--split-out", score.split_out);
    cmd_s->add_option("--out", score.out_path)->required();
    cmd_s->add_option("--csv", score.csv_path);
    cmd_s->add_flag("--all-questions", score.all_questions,
                    "score every question instead of the split's samples");

    DiscoverArgs discover;
    auto* cmd_d = app.add_subcommand("discover", "run constraint-based discovery on a matrix");
    cmd_d->add_option("--matrix", discover.matrix_path)->required();
    cmd_d->add_option("--out", discover.out_path)->required();
    cmd_d->add_option("--alpha", discover.alpha, "significance level (default 0.05)");
    cmd_d->add_option("--max-cond", discover.max_cond, "conditioning-set cap (default 3)");
    cmd_d->add_option("--ci-test", discover.ci_test, "fisher_z or permutation");
    cmd_d->add_option("--n-perm", discover.n_perm);
    cmd_d->add_flag("--dag", discover.as_dag, "extend the CPDAG to a DAG");

    std::string reduce_graph, reduce_out;
    auto* cmd_r = app.add_subcommand("reduce", "transitive reduction of a DAG");
    cmd_r->add_option("--graph", reduce_graph)->required();
    cmd_r->add_option("--out", reduce_out)->required();

    MetricsArgs metrics;
    auto* cmd_m = app.add_subcommand("metrics", "steering-effect report against a graph");
    cmd_m->add_option("--matrix", metrics.matrix_path)->required();
    cmd_m->add_option("--graph", metrics.graph_path)->required();
    cmd_m->add_option("--baseline", metrics.baseline, "baseline row key, e.g. role:r000")->required();
    cmd_m->add_option("--mode", metrics.mode, "role or sae");
    cmd_m->add_option("--out", metrics.out_path)->required();
    cmd_m->add_option("--md", metrics.md_path);
    cmd_m->add_option("--epsilon", metrics.epsilon, "mean-comparison tolerance (default exact)");
    cmd_m->add_flag("--sae-any-role", metrics.sae_any_role);

    std::string predict_graph, predict_target;
    auto* cmd_p = app.add_subcommand("predict", "successor/non-successor sets for a value");
    cmd_p->add_option("--graph", predict_graph)->required();
    cmd_p->add_option("--target", predict_target)->required();

    CompareArgs compare;
    auto* cmd_c = app.add_subcommand("compare", "paired report against a reference edge list");
    cmd_c->add_option("--matrix", compare.matrix_path)->required();
    cmd_c->add_option("--graph", compare.graph_path)->required();
    cmd_c->add_option("--ref", compare.ref_path, "reference graph in edge-list text")->required();
    cmd_c->add_option("--baseline", compare.baseline)->required();
    cmd_c->add_option("--mode", compare.mode);
    cmd_c->add_option("--out", compare.out_path)->required();
    cmd_c->add_option("--md", compare.md_path);
    cmd_c->add_option("--epsilon", compare.epsilon);

    SimulateArgs simulate;
    auto* cmd_sim = app.add_subcommand("simulate", "sample a synthetic oracle world");
    cmd_sim->add_option("--seed", simulate.seed)->required();
    cmd_sim->add_option("--nodes", simulate.nodes);
    cmd_sim->add_option("--degree", simulate.degree);
    cmd_sim->add_option("--roles", simulate.roles);
    cmd_sim->add_option("--features", simulate.features);
    cmd_sim->add_option("--questions", simulate.questions);
    cmd_sim->add_flag("--independent-rows", simulate.independent_rows,
                      "fresh shifts per row (i.i.d. rows for discovery benchmarks)");
    cmd_sim->add_option("--out-matrix", simulate.matrix_out)->required();
    cmd_sim->add_option("--out-graph", simulate.truth_out);
    cmd_sim->add_option("--out-scm", simulate.scm_out);

    RunArgs run;
    auto* cmd_run_ = app.add_subcommand("run", "execute the questionnaire against an endpoint");
    cmd_run_->add_option("--catalog", run.catalog_path)->required();
    cmd_run_->add_option("--roles", run.roles_path)->required();
    cmd_run_->add_option("--split", run.split_path);
    cmd_run_->add_option("--seed", run.seed)->each([&](const std::string&) { run.have_seed = true; });
    cmd_run_->add_option("--conditions", run.conditions_path,
                         "JSON array of conditions (default: one role condition per role)");
    cmd_run_->add_option("--endpoint", run.endpoint, "chat-completions base URL");
    cmd_run_->add_option("--model", run.model);
    cmd_run_->add_option("--api-key-env", run.api_key_env);
    cmd_run_->add_option("--judge-endpoint", run.judge_endpoint);
    cmd_run_->add_option("--judge-model", run.judge_model);
    cmd_run_->add_flag("--stub", run.stub, "use the offline deterministic responder");
    cmd_run_->add_option("--stub-seed", run.stub_seed);
    cmd_run_->add_option("--max-retries", run.max_retries);
    cmd_run_->add_option("--concurrency", run.concurrency);
    cmd_run_->add_flag("--judge-thoughts", run.judge_thoughts);
    cmd_run_->add_option("--out", run.out_path)->required();
    cmd_run_->add_option("--manifest", run.manifest_path);

    ExportArgs exp;
    auto* cmd_e = app.add_subcommand("export", "render graphs and reports");
    cmd_e->add_option("--graph", exp.graph_path);
    cmd_e->add_option("--dot", exp.dot_path);
    cmd_e->add_option("--edges", exp.edges_path, "edge-list text format");
    cmd_e->add_option("--report", exp.report_path);
    cmd_e->add_option("--md", exp.md_path);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_i->parsed()) cmd_ingest(ingest);
        if (cmd_s->parsed()) cmd_score(score);
        if (cmd_d->parsed()) cmd_discover(discover);
        if (cmd_r->parsed()) cmd_reduce(reduce_graph, reduce_out);
        if (cmd_m->parsed()) cmd_metrics(metrics);
        if (cmd_p->parsed()) cmd_predict(predict_graph, predict_target);
        if (cmd_c->parsed()) cmd_compare(compare);
        if (cmd_sim->parsed()) cmd_simulate(simulate);
        if (cmd_run_->parsed()) cmd_run(run);
        if (cmd_e->parsed()) cmd_export(exp);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
