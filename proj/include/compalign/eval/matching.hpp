#pragma once

#include <cstddef>
#include <map>
#include <span>

#include "compalign/core/embedding.hpp"
#include "compalign/eval/records.hpp"
#include "compalign/fusion/pair_scorer.hpp"

namespace compalign {

/// Strictly greater; ties are misses. Throws InvalidArgument on non-finite input.
bool match_decide(Similarity pos, Similarity neg);

struct MatchOutcome {
  MatchRecord record;
  Similarity pos_score;
  Similarity neg_score;
  bool hit = false;
};

MatchOutcome make_outcome(MatchRecord record, Similarity pos, Similarity neg);

struct ComponentTally {
  std::size_t hits = 0;
  std::size_t count = 0;
  double percent() const { return count == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / count; }
};

/// Components without records are absent from per_component.
struct AccuracyReport {
  std::map<Component, ComponentTally> per_component;
  ComponentTally total;
};

/// Throws EmptyInput on no outcomes.
AccuracyReport matching_accuracy(std::span<const MatchOutcome> outcomes);

/// Both pair scores of one record; outcomes for the baseline (global
/// embedding only) and fused scores.
struct MatchEvaluation {
  PairScore positive;
  PairScore negative;
  MatchOutcome baseline;
  MatchOutcome fused;
};

/// The caption is decomposed once and scored against both images.
MatchEvaluation evaluate_match(const MatchRecord& record, const Image& positive,
                               const Image& negative, const Providers& providers,
                               const ScoringOptions& options);

}  // namespace compalign
