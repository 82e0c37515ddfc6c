#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "scalepop/rng.hpp"

namespace scalepop {

enum class MerchantMode { argmax, weighted };

std::string to_string(MerchantMode mode);
MerchantMode parse_merchant_mode(const std::string& name); // throws UsageError

// Central recommendation: the decision adopted from the population and the
// scale of the agent it was taken from. decision is 0 only while no agent
// has produced a decision yet this tick.
struct MerchantState {
    int decision = 0;                // {-1, 0, +1}
    std::int32_t source_agent = -1;  // -1 before anything was ever adopted
    std::int64_t source_scale = 0;
};

struct MerchantCandidate {
    std::int32_t id = 0;
    std::int64_t utility = 0;
    std::int64_t scale = 0;
    int decision = 0;     // preliminary decision, {-1, +1}
    std::int64_t age = 0; // available to future selection rules; unused by both shipped modes
};

// argmax: adopt the decision of the highest-utility candidate, ties to the
// lowest id. weighted: sign of the utility-weighted vote, zero vote counts
// as +1; the occupied scale is the argmax candidate's in both modes. With
// no candidates the previous scale is kept and the decision is 0.
MerchantState merchant_decide(std::span<const MerchantCandidate> candidates, MerchantMode mode,
                              const MerchantState& previous);

// Birth scale for merchant-guided respawns: one Gaussian draw centered on
// the merchant's occupied scale, rounded to the nearest integer and clamped
// into [l_min, l_max]. Clamping rather than resampling keeps the number of
// draws per birth constant, so seed streams stay comparable across modes.
std::int64_t bm_birth_scale(Rng& rng, std::int64_t merchant_scale, double sigma,
                            std::int64_t l_min, std::int64_t l_max);

// Approval gate: keep a preliminary decision only when it matches the
// recommendation; any mismatch (including no recommendation yet) yields the
// passive state 0. Never flips a sign.
inline int rm_gate(int preliminary, int recommendation) {
    return preliminary == recommendation ? preliminary : 0;
}

} // namespace scalepop
