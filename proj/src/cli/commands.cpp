#include "compalign/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "compalign/core/image_io.hpp"
#include "compalign/error.hpp"
#include "compalign/eval/matching.hpp"
#include "compalign/eval/records.hpp"
#include "compalign/eval/retrieval.hpp"

namespace compalign::cli {

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError:
    case ErrorCode::kInvalidFixture:
      return kExitConfig;
    case ErrorCode::kDecompositionFailed:
    case ErrorCode::kUnparseableCaption:
    case ErrorCode::kMalformedReply:
      return kExitDecompositionFailed;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kIoError:
      return kExitUsage;
    default:
      return kExitNoRecords;
  }
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoRecords;
  }
}

void require(bool present, const char* role, const char* command) {
  if (!present) {
    throw Error(ErrorCode::kConfigError,
                std::string(command) + " needs a " + role + " backend (--backend-" + role + ")");
  }
}

void require_llm_if_needed(const RunConfig& config) {
  if (config.policy == DecomposePolicy::kLlmOnly && !config.llm) {
    throw Error(ErrorCode::kConfigError, "policy llm_only needs an llm backend (--backend-llm)");
  }
}

void write_report(const Json& report, const std::filesystem::path& path) {
  if (path.empty()) throw Error(ErrorCode::kConfigError, "--out is required");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write report to " + path.string());
  f << dump_report(report);
  if (!f) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

Json ranking_json(const std::vector<RankedCandidate>& ranking) {
  Json arr = Json::array();
  for (const auto& c : ranking) arr.push_back(Json{{"image_id", c.image_id}, {"score", c.score}});
  return arr;
}

Json optional_rank(const std::optional<std::size_t>& r) { return r ? Json(*r) : Json(nullptr); }

Json accuracy_json(const AccuracyReport& report) {
  Json j = Json::object();
  for (const auto& [component, tally] : report.per_component) {
    j[std::string(to_string(component))] =
        Json{{"hits", tally.hits}, {"count", tally.count}, {"percent", tally.percent()}};
  }
  j["total"] = Json{{"hits", report.total.hits},
                    {"count", report.total.count},
                    {"percent", report.total.percent()}};
  return j;
}

std::string format_percent(const Json& cell) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", cell.at("percent").get<double>());
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

int cmd_decompose(const std::string& caption, const RunConfig& config, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    require_llm_if_needed(config);
    const Backends backends(config);
    const auto options = config.scoring_options();
    const auto d = decompose(caption, backends.handles().llm, options.decompose);
    out << dump_report(d.to_json());
    return static_cast<int>(kExitOk);
  });
}

int cmd_score_pair(const std::string& caption, const std::filesystem::path& image,
                   const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    require(config.embedder.has_value(), "embed", "score-pair");
    require(config.detector.has_value(), "detect", "score-pair");
    require_llm_if_needed(config);
    const Backends backends(config);
    const auto options = config.scoring_options();
    const Image img = load_image(image);
    const auto score = score_pair(img, caption, backends.handles(), options);
    out << dump_report(score.to_json(config.fusion));
    return static_cast<int>(kExitOk);
  });
}

int cmd_match(const std::filesystem::path& pairs, const std::filesystem::path& images,
              const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    if (config.out.empty()) throw Error(ErrorCode::kConfigError, "match needs --out");
    require(config.embedder.has_value(), "embed", "match");
    require(config.detector.has_value(), "detect", "match");
    require_llm_if_needed(config);
    const auto records = load_match_records(pairs);
    if (records.empty()) {
      err << "error: no records in " << pairs.string() << '\n';
      return static_cast<int>(kExitNoRecords);
    }
    const auto catalog = ImageCatalog::load(images);
    const Backends backends(config);
    const auto providers = backends.handles();
    const auto options = config.scoring_options();

    std::vector<std::string> needed;
    for (const auto& r : records) {
      needed.push_back(r.positive_image_id);
      needed.push_back(r.negative_image_id);
    }
    const auto loaded = load_images(catalog, needed);

    struct Slot {
      std::optional<MatchEvaluation> evaluation;
      std::string error;
    };
    std::vector<Slot> slots(records.size());
    const auto n = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel for num_threads(config.workers) schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& r = records[static_cast<std::size_t>(i)];
      auto& slot = slots[static_cast<std::size_t>(i)];
      const auto& pos = loaded.at(r.positive_image_id);
      const auto& neg = loaded.at(r.negative_image_id);
      if (!pos.image) {
        slot.error = "positive image " + r.positive_image_id + ": " + pos.error;
        continue;
      }
      if (!neg.image) {
        slot.error = "negative image " + r.negative_image_id + ": " + neg.error;
        continue;
      }
      try {
        slot.evaluation = evaluate_match(r, *pos.image, *neg.image, providers, options);
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
    }

    Json report;
    report["command"] = "match";
    report["config"] = config.to_json();
    Json rows = Json::array();
    std::vector<MatchOutcome> baseline, fused;
    std::size_t flips = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      Json row;
      row["index"] = i;
      row["caption"] = r.caption;
      row["component"] = std::string(to_string(r.component));
      row["positive_image_id"] = r.positive_image_id;
      row["negative_image_id"] = r.negative_image_id;
      if (!slots[i].evaluation) {
        row["status"] = "failed";
        row["error"] = slots[i].error;
        rows.push_back(std::move(row));
        continue;
      }
      const auto& ev = *slots[i].evaluation;
      row["status"] = "ok";
      row["baseline"] = Json{{"positive", ev.baseline.pos_score.value},
                             {"negative", ev.baseline.neg_score.value},
                             {"hit", ev.baseline.hit}};
      row["fused"] = Json{{"positive", ev.fused.pos_score.value},
                          {"negative", ev.fused.neg_score.value},
                          {"hit", ev.fused.hit}};
      row["flipped"] = ev.baseline.hit != ev.fused.hit;
      row["positive_score"] = ev.positive.to_json(config.fusion);
      row["negative_score"] = ev.negative.to_json(config.fusion);
      row["positive_score"].erase("config");
      row["negative_score"].erase("config");
      if (ev.baseline.hit != ev.fused.hit) ++flips;
      baseline.push_back(ev.baseline);
      fused.push_back(ev.fused);
      rows.push_back(std::move(row));
    }
    report["records"] = std::move(rows);
    Json summary;
    summary["records"] = records.size();
    summary["scored"] = baseline.size();
    summary["failed"] = records.size() - baseline.size();
    if (!baseline.empty()) {
      summary["baseline"] = accuracy_json(matching_accuracy(baseline));
      summary["fused"] = accuracy_json(matching_accuracy(fused));
    }
    summary["flips"] = flips;
    report["summary"] = std::move(summary);

    write_report(report, config.out);
    if (baseline.empty()) {
      err << "error: no record could be scored\n";
      return static_cast<int>(kExitNoRecords);
    }
    out << render_match_table(report);
    return static_cast<int>(kExitOk);
  });
}

int cmd_retrieve(const std::filesystem::path& queries, const std::filesystem::path& corpus,
                 const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    if (config.out.empty()) throw Error(ErrorCode::kConfigError, "retrieve needs --out");
    require(config.embedder.has_value(), "embed", "retrieve");
    require(config.detector.has_value(), "detect", "retrieve");
    require_llm_if_needed(config);
    const auto all_queries = load_retrieval_queries(queries);
    if (all_queries.empty()) {
      err << "error: no records in " << queries.string() << '\n';
      return static_cast<int>(kExitNoRecords);
    }
    const auto catalog = ImageCatalog::load(corpus);
    const Backends backends(config);
    const auto providers = backends.handles();
    const auto options = config.scoring_options();

    Json corpus_errors = Json::array();
    std::vector<Image> images;
    {
      const auto loaded = load_images(catalog, catalog.ids());
      for (const auto& id : catalog.ids()) {
        const auto& l = loaded.at(id);
        if (l.image) {
          images.push_back(*l.image);
        } else {
          corpus_errors.push_back(Json{{"image_id", id}, {"error", l.error}});
        }
      }
    }
    std::map<std::string, const Image*, std::less<>> by_id;
    for (const auto& img : images) by_id.emplace(img.id(), &img);

    Json rejected = Json::array();
    std::vector<std::size_t> accepted;
    for (std::size_t i = 0; i < all_queries.size(); ++i) {
      const auto& q = all_queries[i];
      std::string why;
      if (!catalog.contains(q.gold_image_id)) {
        why = "gold image missing from corpus manifest";
      } else if (!by_id.contains(q.gold_image_id)) {
        why = "gold image could not be loaded";
      }
      if (why.empty()) {
        accepted.push_back(i);
      } else {
        rejected.push_back(Json{{"index", i},
                                {"caption", q.caption},
                                {"gold_image_id", q.gold_image_id},
                                {"error", why}});
      }
    }

    std::optional<CorpusIndex> index;
    if (!images.empty()) {
      index.emplace(images, *providers.embedder, config.fusion.normalize_embeddings,
                    config.workers);
    }

    struct Slot {
      std::optional<RetrievalOutcome> outcome;
      std::vector<std::string> warnings;
      std::string error;
    };
    std::vector<Slot> slots(accepted.size());
    const auto n = static_cast<std::ptrdiff_t>(accepted.size());
#pragma omp parallel for num_threads(config.workers) schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& q = all_queries[accepted[static_cast<std::size_t>(i)]];
      auto& slot = slots[static_cast<std::size_t>(i)];
      try {
        auto query = providers.embedder->embed_text(q.caption);
        if (config.fusion.normalize_embeddings) query = l2_normalize(query);
        RetrievalOutcome o;
        o.caption = q.caption;
        o.gold_image_id = q.gold_image_id;
        o.baseline = index->topk(query, config.topk);
        const auto d = decompose(q.caption, providers.llm, options.decompose);
        std::vector<RerankCandidate> candidates;
        for (const auto& c : o.baseline) candidates.push_back({by_id.at(c.image_id), c.score});
        auto reranked = rerank(d, candidates, providers, options);
        o.reranked = std::move(reranked.ranking);
        slot.warnings = std::move(reranked.warnings);
        o.gold_rank_before = rank_of(o.baseline, o.gold_image_id);
        o.gold_rank_after = rank_of(o.reranked, o.gold_image_id);
        slot.outcome = std::move(o);
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
    }

    Json report;
    report["command"] = "retrieve";
    report["config"] = config.to_json();
    report["topk"] = config.topk;
    report["recall_ks"] = config.recall_ks;
    report["corpus"] = Json{{"images", images.size()}, {"errors", std::move(corpus_errors)}};
    Json rows = Json::array();
    std::vector<RetrievalOutcome> outcomes;
    for (std::size_t i = 0; i < accepted.size(); ++i) {
      const auto& q = all_queries[accepted[i]];
      const auto& slot = slots[i];
      Json row;
      row["index"] = accepted[i];
      row["caption"] = q.caption;
      row["gold_image_id"] = q.gold_image_id;
      if (!slot.outcome) {
        row["status"] = "failed";
        row["error"] = slot.error;
        rows.push_back(std::move(row));
        continue;
      }
      const auto& o = *slot.outcome;
      row["status"] = "ok";
      row["gold_rank_before"] = optional_rank(o.gold_rank_before);
      row["gold_rank_after"] = optional_rank(o.gold_rank_after);
      row["baseline"] = ranking_json(o.baseline);
      row["reranked"] = ranking_json(o.reranked);
      row["warnings"] = slot.warnings;
      outcomes.push_back(o);
      rows.push_back(std::move(row));
    }
    report["queries"] = std::move(rows);
    report["rejected"] = std::move(rejected);
    Json summary;
    summary["queries"] = all_queries.size();
    summary["scored"] = outcomes.size();
    summary["failed"] = accepted.size() - outcomes.size();
    summary["rejected"] = all_queries.size() - accepted.size();
    if (!outcomes.empty()) {
      Json before = Json::object(), after = Json::object();
      for (const auto& [k, v] : recall_at_k(outcomes, config.recall_ks, RankStage::kBefore)) {
        before[std::to_string(k)] = v;
      }
      for (const auto& [k, v] : recall_at_k(outcomes, config.recall_ks, RankStage::kAfter)) {
        after[std::to_string(k)] = v;
      }
      summary["recall_before"] = std::move(before);
      summary["recall_after"] = std::move(after);
    }
    report["summary"] = std::move(summary);

    write_report(report, config.out);
    if (outcomes.empty()) {
      err << "error: no query could be scored\n";
      return static_cast<int>(kExitNoRecords);
    }
    out << render_recall_table(report);
    return static_cast<int>(kExitOk);
  });
}

std::string render_match_table(const Json& report) {
  const auto& summary = report.at("summary");
  std::ostringstream s;
  s << pad("", 10) << pad("Sub", 9) << pad("Rel", 9) << pad("Obj", 9) << pad("Total", 9) << '\n';
  for (const char* row : {"baseline", "fused"}) {
    s << std::string(row) + std::string(10 - std::string(row).size(), ' ');
    const auto& acc = summary.at(row);
    for (const char* col : {"subject", "relation", "object", "total"}) {
      s << pad(acc.contains(col) ? format_percent(acc.at(col)) : "-", 9);
    }
    s << '\n';
  }
  s << "scored " << summary.at("scored").get<std::size_t>() << "/"
    << summary.at("records").get<std::size_t>() << ", flips "
    << summary.at("flips").get<std::size_t>() << '\n';
  return s.str();
}

std::string render_recall_table(const Json& report) {
  const auto& summary = report.at("summary");
  const auto& before = summary.at("recall_before");
  const auto& after = summary.at("recall_after");
  std::ostringstream s;
  s << pad("", 10);
  for (const auto& [k, v] : before.items()) s << pad("R@" + k, 9);
  s << '\n';
  for (const auto& [name, table] : {std::pair{"before", &before}, std::pair{"after", &after}}) {
    s << name << std::string(10 - std::string(name).size(), ' ');
    for (const auto& [k, v] : table->items()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", v.get<double>());
      s << pad(buf, 9);
    }
    s << '\n';
  }
  s << "scored " << summary.at("scored").get<std::size_t>() << "/"
    << summary.at("queries").get<std::size_t>() << ", rejected "
    << summary.at("rejected").get<std::size_t>() << '\n';
  return s.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grounded compositional image-text alignment"};
  app.name("compalign");
  app.require_subcommand(1);

  struct Common {
    std::string config_file, embed, detect, llm, policy, out, prompt1, prompt2, weight_mode;
    int workers = 1;
    double box_threshold = kDefaultBoxThreshold;
  };
  Common common;
  std::string caption, image, pairs, images, queries, corpus;
  std::size_t topk = 10;
  std::vector<int> recall_ks;

  std::map<CLI::App*, std::vector<CLI::Option*>> opts;
  auto add_common = [&](CLI::App* sub) {
    auto& o = opts[sub];
    o.push_back(sub->add_option("--config", common.config_file, "JSON run config")
                    ->check(CLI::ExistingFile));
    o.push_back(sub->add_option("--backend-embed", common.embed, "fixture:<dir> or http:<url>"));
    o.push_back(sub->add_option("--backend-detect", common.detect, "fixture:<dir> or http:<url>"));
    o.push_back(sub->add_option("--backend-llm", common.llm, "fixture:<dir> or http:<url>"));
    o.push_back(sub->add_option("--policy", common.policy,
                                "rule_first | llm_first | rule_only | llm_only"));
    o.push_back(sub->add_option("--out", common.out, "Report path"));
    o.push_back(sub->add_option("--workers", common.workers, "Worker threads")
                    ->check(CLI::PositiveNumber));
    o.push_back(sub->add_option("--box-threshold", common.box_threshold, "Detector threshold")
                    ->check(CLI::Range(0.0, 1.0)));
    o.push_back(sub->add_option("--prompt-stage1", common.prompt1, "Stage-1 prompt template"));
    o.push_back(sub->add_option("--prompt-stage2", common.prompt2, "Stage-2 prompt template"));
    o.push_back(sub->add_option("--weight-mode", common.weight_mode, "raw_cosine | softmax"));
  };

  auto* dec = app.add_subcommand("decompose", "Print the decomposition of a caption");
  dec->add_option("--caption", caption)->required();
  add_common(dec);

  auto* sp = app.add_subcommand("score-pair", "Score one caption against one image");
  sp->add_option("--caption", caption)->required();
  sp->add_option("--image", image)->required()->check(CLI::ExistingFile);
  add_common(sp);

  auto* match = app.add_subcommand("match", "Two-alternative matching evaluation");
  match->add_option("--pairs", pairs, "Match records (JSONL)")->required();
  match->add_option("--images", images, "Image manifest (JSONL)")->required();
  add_common(match);

  auto* ret = app.add_subcommand("retrieve", "Retrieval with grounded re-ranking");
  ret->add_option("--queries", queries, "Retrieval queries (JSONL)")->required();
  ret->add_option("--corpus", corpus, "Corpus manifest (JSONL)")->required();
  auto* topk_opt = ret->add_option("--topk", topk, "Baseline candidates per query")
                       ->check(CLI::PositiveNumber);
  auto* ks_opt = ret->add_option("--recall-ks", recall_ks, "Recall cutoffs")
                     ->delimiter(',')
                     ->check(CLI::PositiveNumber);
  add_common(ret);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? static_cast<int>(kExitOk) : static_cast<int>(kExitUsage);
  }

  CLI::App* active = app.get_subcommands().front();
  auto given = [&](std::size_t i) { return opts[active][i]->count() > 0; };

  RunConfig config;
  const int code = guarded(err, [&] {
    if (given(0)) config = RunConfig::load(common.config_file);
    if (given(1)) config.embedder = parse_provider_locator(common.embed);
    if (given(2)) config.detector = parse_provider_locator(common.detect);
    if (given(3)) config.llm = parse_provider_locator(common.llm);
    if (given(4)) config.policy = parse_decompose_policy(common.policy);
    if (given(5)) config.out = common.out;
    if (given(6)) config.workers = common.workers;
    if (given(7)) {
      if (!config.detector) {
        throw Error(ErrorCode::kConfigError, "--box-threshold needs a detect backend");
      }
      config.detector->box_threshold = common.box_threshold;
    }
    if (given(8)) config.stage1_prompt = common.prompt1;
    if (given(9)) config.stage2_prompt = common.prompt2;
    if (given(10)) {
      Json j = config.fusion.to_json();
      j["weight_mode"] = common.weight_mode;
      config.fusion = FusionConfig::from_json(j);
    }
    if (topk_opt->count() > 0) config.topk = topk;
    if (ks_opt->count() > 0) config.recall_ks = recall_ks;
    return static_cast<int>(kExitOk);
  });
  if (code != kExitOk) return code;

  if (active == dec) return cmd_decompose(caption, config, out, err);
  if (active == sp) return cmd_score_pair(caption, image, config, out, err);
  if (active == match) return cmd_match(pairs, images, config, out, err);
  return cmd_retrieve(queries, corpus, config, out, err);
}

}  // namespace compalign::cli
