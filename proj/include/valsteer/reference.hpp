#pragma once

namespace valsteer::reference {

// Reference magnitudes reported for the upstream Gemma-2B-IT / Llama3-8B-IT
// runs. Those runs need GPU inference with pretrained SAEs and are not
// reproducible here; the constants exist to exercise report formatting and
// to document the expected scale of each statistic.

struct SteeringEffect {
    double expected_ours;
    double expected_reference;
    double unexpected_ours;
    double unexpected_reference;
};

inline constexpr SteeringEffect kGemmaPrompt{0.69, 0.51, 0.56, 0.60};
inline constexpr SteeringEffect kGemmaSae{0.57, 0.43, 0.51, 0.53};
inline constexpr SteeringEffect kLlamaPrompt{0.57, 0.45, 0.47, 0.50};
inline constexpr SteeringEffect kLlamaSae{0.74, 0.49, 0.46, 0.55};

// mean number of steered values per condition
inline constexpr double kGemmaRoleMeanSteered = 14.6;
inline constexpr double kLlamaRoleMeanSteered = 7.7;
inline constexpr double kGemmaSaeMeanSteered = 4.3;
inline constexpr double kLlamaSaeMeanSteered = 4.2;

// probability that thought and answer labels disagree, before/after steering
inline constexpr double kGemmaInconsistencyBefore = 0.18;
inline constexpr double kGemmaInconsistencyAfter = 0.20;
inline constexpr double kLlamaInconsistencyBefore = 0.15;
inline constexpr double kLlamaInconsistencyAfter = 0.15;

// scale anchors: 17 values survive the >20-question filter; 101 training
// roles crossed with 25 features give 2,525 orientation rows
inline constexpr int kValueCount = 17;
inline constexpr int kTrainingRoles = 101;
inline constexpr int kSaeFeatures = 25;
inline constexpr int kOrientationRows = kTrainingRoles * kSaeFeatures;

} // namespace valsteer::reference
