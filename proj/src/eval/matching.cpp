#include "compalign/eval/matching.hpp"

#include <cmath>

#include "compalign/error.hpp"

namespace compalign {

bool match_decide(Similarity pos, Similarity neg) {
  if (!std::isfinite(pos.value) || !std::isfinite(neg.value)) {
    throw Error(ErrorCode::kInvalidArgument, "match scores must be finite");
  }
  return pos.value > neg.value;
}

MatchOutcome make_outcome(MatchRecord record, Similarity pos, Similarity neg) {
  return MatchOutcome{std::move(record), pos, neg, match_decide(pos, neg)};
}

AccuracyReport matching_accuracy(std::span<const MatchOutcome> outcomes) {
  if (outcomes.empty()) throw Error(ErrorCode::kEmptyInput, "no match outcomes");
  AccuracyReport report;
  for (const auto& o : outcomes) {
    auto& tally = report.per_component[o.record.component];
    ++tally.count;
    ++report.total.count;
    if (o.hit) {
      ++tally.hits;
      ++report.total.hits;
    }
  }
  return report;
}

MatchEvaluation evaluate_match(const MatchRecord& record, const Image& positive,
                               const Image& negative, const Providers& providers,
                               const ScoringOptions& options) {
  const auto decomposition = decompose(record.caption, providers.llm, options.decompose);
  auto pos = score_pair(positive, decomposition, providers, options);
  auto neg = score_pair(negative, decomposition, providers, options);
  auto baseline = make_outcome(record, pos.base_similarity, neg.base_similarity);
  auto fused = make_outcome(record, pos.fused_similarity, neg.fused_similarity);
  return MatchEvaluation{std::move(pos), std::move(neg), std::move(baseline), std::move(fused)};
}

}  // namespace compalign
