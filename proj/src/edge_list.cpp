#include "valsteer/edge_list.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <vector>

namespace valsteer {

namespace {

struct Token {
    enum class Type { word, symbol, string } type;
    std::string text;
};

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '#') {
            while (i < n && text[i] != '\n') ++i;
        } else if (c == '\'' || c == '"') {
            const char quote = c;
            std::string s;
            ++i;
            while (i < n && text[i] != quote) s.push_back(text[i++]);
            if (i == n) throw ParseError("unterminated string in edge list");
            ++i;
            tokens.push_back({Token::Type::string, std::move(s)});
        } else if (c == '[' || c == ']' || c == ',' || c == '=') {
            tokens.push_back({Token::Type::symbol, std::string(1, c)});
            ++i;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string w;
            while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
                w.push_back(text[i++]);
            tokens.push_back({Token::Type::word, std::move(w)});
        } else {
            throw ParseError("unexpected character '" + std::string(1, c) + "' in edge list");
        }
    }
    return tokens;
}

struct Cursor {
    const std::vector<Token>& tokens;
    std::size_t pos = 0;

    bool done() const { return pos >= tokens.size(); }
    const Token& peek() const {
        if (done()) throw ParseError("unexpected end of edge list");
        return tokens[pos];
    }
    Token next() {
        Token t = peek();
        ++pos;
        return t;
    }
    void expect_symbol(const std::string& s) {
        Token t = next();
        if (t.type != Token::Type::symbol || t.text != s)
            throw ParseError("expected '" + s + "' in edge list, got '" + t.text + "'");
    }
    bool try_symbol(const std::string& s) {
        if (!done() && peek().type == Token::Type::symbol && peek().text == s) {
            ++pos;
            return true;
        }
        return false;
    }
};

std::vector<std::string> parse_string_pairless_list(Cursor& cur) {
    std::vector<std::string> items;
    cur.expect_symbol("[");
    while (!cur.try_symbol("]")) {
        Token t = cur.next();
        if (t.type != Token::Type::string)
            throw ParseError("node list entries must be quoted strings");
        items.push_back(t.text);
        if (!cur.try_symbol(",")) {
            cur.expect_symbol("]");
            break;
        }
    }
    return items;
}

std::vector<std::pair<std::string, std::string>> parse_pair_list(Cursor& cur) {
    std::vector<std::pair<std::string, std::string>> pairs;
    cur.expect_symbol("[");
    while (!cur.try_symbol("]")) {
        cur.expect_symbol("[");
        std::vector<std::string> entries;
        while (!cur.try_symbol("]")) {
            Token t = cur.next();
            if (t.type != Token::Type::string)
                throw ParseError("edge entries must be quoted strings");
            entries.push_back(t.text);
            if (!cur.try_symbol(",")) {
                cur.expect_symbol("]");
                break;
            }
        }
        if (entries.size() != 2)
            throw ParseError("each edge must be a [cause, effect] pair, got " +
                             std::to_string(entries.size()) + " entries");
        pairs.emplace_back(entries[0], entries[1]);
        if (!cur.try_symbol(",")) {
            cur.expect_symbol("]");
            break;
        }
    }
    return pairs;
}

} // namespace

CausalGraph parse_edge_list(const std::string& text) {
    const std::vector<Token> tokens = tokenize(text);
    Cursor cur{tokens};

    std::optional<std::vector<std::pair<std::string, std::string>>> edges;
    std::vector<std::string> declared_nodes;
    while (!cur.done()) {
        Token name = cur.next();
        if (name.type != Token::Type::word)
            throw ParseError("expected 'edges = [...]' block, got '" + name.text + "'");
        cur.expect_symbol("=");
        if (name.text == "edges") {
            if (edges) throw ParseError("duplicate edges block");
            edges = parse_pair_list(cur);
        } else if (name.text == "nodes") {
            declared_nodes = parse_string_pairless_list(cur);
        } else {
            throw ParseError("unknown block '" + name.text + "' in edge list");
        }
    }
    if (!edges) throw ParseError("no 'edges = [...]' block found");

    std::vector<std::string> nodes = declared_nodes;
    for (const auto& [a, b] : *edges) {
        nodes.push_back(a);
        nodes.push_back(b);
    }
    CausalGraph g = CausalGraph::make(CausalGraph::Kind::digraph, std::move(nodes));
    for (const auto& [a, b] : *edges) {
        if (a == b) throw ParseError("self-loop on '" + a + "' in edge list");
        g.add_directed(a, b);
    }
    return g;
}

CausalGraph parse_edge_list(const std::string& text, const Catalog& catalog) {
    CausalGraph g = parse_edge_list(text);
    for (const auto& node : g.nodes)
        if (!catalog.has_value(node))
            throw UnknownNode("edge list node '" + node + "' is not a catalog value");
    return g;
}

std::string emit_edge_list(const CausalGraph& graph) {
    std::string out = "edges = [\n";
    for (const auto& [f, t] : graph.directed_edges)
        out += "    ['" + f + "', '" + t + "'],\n";
    out += "]\n";
    return out;
}

CausalGraph hierarchy_graph(const Catalog& catalog) {
    CausalGraph g = CausalGraph::make(CausalGraph::Kind::digraph, catalog.value_ids());
    const auto& values = catalog.values();
    for (std::size_t a = 0; a < values.size(); ++a) {
        for (std::size_t b = a + 1; b < values.size(); ++b) {
            const auto& ta = values[a].upper_dimensions;
            const auto& tb = values[b].upper_dimensions;
            const bool shared = std::any_of(ta.begin(), ta.end(), [&](const std::string& tag) {
                return std::count(tb.begin(), tb.end(), tag) > 0;
            });
            if (shared) {
                g.add_directed(values[a].id, values[b].id);
                g.add_directed(values[b].id, values[a].id);
            }
        }
    }
    g.notes.push_back("hierarchy: shared upper-dimension pairs, both directions");
    return g;
}

} // namespace valsteer
