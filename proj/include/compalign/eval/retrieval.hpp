#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compalign/backends/provider.hpp"
#include "compalign/core/image.hpp"
#include "compalign/fusion/pair_scorer.hpp"

namespace compalign {

struct RankedCandidate {
  std::string image_id;
  double score = 0.0;

  bool operator==(const RankedCandidate&) const = default;
};

/// Descending score, ties by ascending image id.
bool ranking_order(const RankedCandidate& a, const RankedCandidate& b);

/// Global embeddings of a corpus, computed once and reused across queries.
class CorpusIndex {
 public:
  /// Embeds every image; workers > 1 embeds them concurrently.
  CorpusIndex(std::span<const Image> images, const Embedder& embedder, bool normalize,
              int workers = 1);

  std::size_t size() const noexcept { return ids_.size(); }

  /// First min(k, size) images by cosine with the query embedding.
  std::vector<RankedCandidate> topk(const EmbeddingVector& query, std::size_t k) const;

 private:
  std::vector<std::string> ids_;
  std::vector<EmbeddingVector> embeddings_;
};

/// Baseline retrieval by global-embedding cosine. Throws InvalidArgument on
/// k == 0 or an empty corpus.
std::vector<RankedCandidate> baseline_topk(std::string_view caption,
                                           std::span<const Image> corpus, std::size_t k,
                                           const Embedder& embedder, bool normalize = true);

struct RerankCandidate {
  const Image* image = nullptr;
  double baseline_score = 0.0;
};

struct RerankResult {
  std::vector<RankedCandidate> ranking;
  std::vector<std::string> warnings;
};

/// Rescores each candidate by its fused similarity and sorts by
/// ranking_order. Under the skip policy a candidate whose scoring fails
/// keeps its baseline score and a warning is recorded.
RerankResult rerank(const CaptionDecomposition& decomposition,
                    std::span<const RerankCandidate> candidates, const Providers& providers,
                    const ScoringOptions& options);

struct RetrievalOutcome {
  std::string caption;
  std::string gold_image_id;
  std::vector<RankedCandidate> baseline;
  std::vector<RankedCandidate> reranked;
  std::optional<std::size_t> gold_rank_before;  // 1-based
  std::optional<std::size_t> gold_rank_after;
};

std::optional<std::size_t> rank_of(std::span<const RankedCandidate> ranking,
                                   std::string_view image_id);

enum class RankStage { kBefore, kAfter };

/// Percent of outcomes whose gold rank is <= k; an absent rank is a miss.
/// Throws EmptyInput on no outcomes or no ks, InvalidArgument on k < 1.
std::map<int, double> recall_at_k(std::span<const RetrievalOutcome> outcomes,
                                  std::span<const int> ks, RankStage stage = RankStage::kAfter);

}  // namespace compalign
