#pragma once

#include <vector>

#include "proverb/runner.hpp"

namespace testsupport {

// Reference comparison values used to check report arithmetic and layout.
inline std::vector<proverb::MethodReport> reference_reports() {
    using proverb::Strategy;
    auto row = [](Strategy s, double acc, double depth, double bleu, double bert) {
        proverb::MethodReport r;
        r.strategy = s;
        r.accuracy = acc;
        r.cultural_depth = depth;
        r.bleu = bleu;
        r.bertscore = bert;
        r.n_items = 400;
        return r;
    };
    return {row(Strategy::ZeroShot, 0.56, 2.98, 12.84, 0.90), row(Strategy::ZeroShotCoT, 0.56, 3.15, 13.00, 0.90),
            row(Strategy::FewShot, 0.59, 2.71, 14.49, 0.90), row(Strategy::RagFewShot, 0.66, 3.53, 15.76, 0.90),
            row(Strategy::CgCoT, 0.65, 3.77, 12.68, 0.89)};
}

}  // namespace testsupport
