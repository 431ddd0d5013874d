#include "compalign/eval/retrieval.hpp"

#include <algorithm>

#include "compalign/error.hpp"
#include "compalign/kernels/kernels.hpp"

namespace compalign {

bool ranking_order(const RankedCandidate& a, const RankedCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.image_id < b.image_id;
}

CorpusIndex::CorpusIndex(std::span<const Image> images, const Embedder& embedder, bool normalize,
                         int workers) {
  if (images.empty()) throw Error(ErrorCode::kInvalidArgument, "empty corpus");
  ids_.reserve(images.size());
  for (const auto& img : images) ids_.push_back(img.id());

  std::vector<std::optional<EmbeddingVector>> slots(images.size());
  std::vector<std::string> errors(images.size());
  const auto count = static_cast<long>(images.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (workers > 1)
  for (long i = 0; i < count; ++i) {
    try {
      auto v = embedder.embed_image(images[static_cast<std::size_t>(i)]);
      if (normalize) v = l2_normalize(v);
      slots[static_cast<std::size_t>(i)] = std::move(v);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  embeddings_.reserve(images.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) {
      throw Error(ErrorCode::kProviderError, "embedding corpus image " + ids_[i] + ": " + errors[i]);
    }
    if (i > 0) require_same_dim(embeddings_.front(), *slots[i]);
    embeddings_.push_back(std::move(*slots[i]));
  }
}

std::vector<RankedCandidate> CorpusIndex::topk(const EmbeddingVector& query, std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  require_same_dim(embeddings_.front(), query);
  if (query.norm() < kZeroNormThreshold) {
    throw Error(ErrorCode::kZeroVector, "query embedding has zero norm");
  }
  for (const auto& e : embeddings_) {
    if (e.norm() < kZeroNormThreshold) {
      throw Error(ErrorCode::kZeroVector, "corpus embedding has zero norm");
    }
  }
  const auto scores = kernels::omp::batch_cosine(embeddings_, query);
  std::vector<RankedCandidate> ranked;
  ranked.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) ranked.push_back({ids_[i], scores[i]});
  const auto keep = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<long>(keep), ranked.end(),
                    ranking_order);
  ranked.resize(keep);
  return ranked;
}

std::vector<RankedCandidate> baseline_topk(std::string_view caption,
                                           std::span<const Image> corpus, std::size_t k,
                                           const Embedder& embedder, bool normalize) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const CorpusIndex index(corpus, embedder, normalize);
  auto query = embedder.embed_text(caption);
  if (normalize) query = l2_normalize(query);
  return index.topk(query, k);
}

RerankResult rerank(const CaptionDecomposition& decomposition,
                    std::span<const RerankCandidate> candidates, const Providers& providers,
                    const ScoringOptions& options) {
  if (candidates.empty()) throw Error(ErrorCode::kEmptyInput, "no candidates to rerank");
  RerankResult result;
  result.ranking.reserve(candidates.size());
  for (const auto& c : candidates) {
    try {
      const auto score = score_pair(*c.image, decomposition, providers, options);
      result.ranking.push_back({c.image->id(), score.fused_similarity.value});
    } catch (const Error& e) {
      if (options.fusion.missing_entity_policy != MissingEntityPolicy::kSkip) throw;
      result.warnings.push_back("candidate " + c.image->id() + " kept baseline score: " + e.what());
      result.ranking.push_back({c.image->id(), c.baseline_score});
    }
  }
  std::stable_sort(result.ranking.begin(), result.ranking.end(), ranking_order);
  return result;
}

std::optional<std::size_t> rank_of(std::span<const RankedCandidate> ranking,
                                   std::string_view image_id) {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (ranking[i].image_id == image_id) return i + 1;
  }
  return std::nullopt;
}

std::map<int, double> recall_at_k(std::span<const RetrievalOutcome> outcomes,
                                  std::span<const int> ks, RankStage stage) {
  if (outcomes.empty()) throw Error(ErrorCode::kEmptyInput, "no retrieval outcomes");
  if (ks.empty()) throw Error(ErrorCode::kEmptyInput, "no k values");
  std::map<int, double> out;
  for (int k : ks) {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "recall k must be >= 1");
    std::size_t hits = 0;
    for (const auto& o : outcomes) {
      const auto& rank = stage == RankStage::kBefore ? o.gold_rank_before : o.gold_rank_after;
      if (rank && *rank <= static_cast<std::size_t>(k)) ++hits;
    }
    out[k] = 100.0 * static_cast<double>(hits) / static_cast<double>(outcomes.size());
  }
  return out;
}

}  // namespace compalign
