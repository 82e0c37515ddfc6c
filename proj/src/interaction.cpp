#include "scalepop/interaction.hpp"

#include <algorithm>
#include <cmath>

#include "scalepop/errors.hpp"

namespace scalepop {

std::string to_string(MerchantMode mode) {
    return mode == MerchantMode::argmax ? "argmax" : "weighted";
}

MerchantMode parse_merchant_mode(const std::string& name) {
    if (name == "argmax") return MerchantMode::argmax;
    if (name == "weighted") return MerchantMode::weighted;
    throw UsageError("unknown merchant mode: \"" + name + "\" (expected argmax or weighted)");
}

MerchantState merchant_decide(std::span<const MerchantCandidate> candidates, MerchantMode mode,
                              const MerchantState& previous) {
    if (candidates.empty()) return {0, previous.source_agent, previous.source_scale};

    const MerchantCandidate* best = &candidates.front();
    for (const MerchantCandidate& c : candidates) {
        if (c.utility > best->utility || (c.utility == best->utility && c.id < best->id))
            best = &c;
    }

    int decision = best->decision;
    if (mode == MerchantMode::weighted) {
        std::int64_t vote = 0;
        for (const MerchantCandidate& c : candidates) vote += c.utility * c.decision;
        decision = vote >= 0 ? +1 : -1; // a dead-even vote counts as buy
    }
    return {decision, best->id, best->scale};
}

std::int64_t bm_birth_scale(Rng& rng, std::int64_t merchant_scale, double sigma,
                            std::int64_t l_min, std::int64_t l_max) {
    const double draw = rng.gaussian(static_cast<double>(merchant_scale), sigma);
    const std::int64_t rounded = static_cast<std::int64_t>(std::llround(draw));
    return std::clamp(rounded, l_min, l_max);
}

} // namespace scalepop
