#pragma once

#include <iosfwd>

#include "tala/common.hpp"
#include "tala/config.hpp"
#include "tala/metrics.hpp"

TALA_NAMESPACE_BEGIN

// Treebank components (tagger, parser) are scored by k-fold cross
// validation, k = evaluation.folds; fold f trains with seed + f. Held-out
// components (ner, textcat) run evaluation.trials trials with seeds
// seed + t, on the configured test file or else on an 80/10/10 split drawn
// with the trial seed.
//
// Metrics: tagger.acc, parser.uas, parser.las (unit "fold", with fold
// sizes), ner.p, ner.r, ner.f1, textcat.acc, textcat.f1 (unit "trial").
MetricsReport run_benchmark(const PipelineConfig& config, std::ostream* log = nullptr);

TALA_NAMESPACE_END
