#include "support/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include "compalign/backends/fixture_store.hpp"
#include "compalign/backends/http_provider.hpp"
#include "compalign/cli/commands.hpp"
#include "compalign/core/digest.hpp"
#include "compalign/core/geometry.hpp"
#include "compalign/core/image.hpp"
#include "compalign/core/image_io.hpp"
#include "compalign/decompose/svo_parser.hpp"
#include "compalign/error.hpp"
#include "compalign/eval/matching.hpp"
#include "compalign/fusion/fusion.hpp"
#include "compalign/fusion/pair_scorer.hpp"
#include "support/helpers.hpp"
#include "support/mock_server.hpp"

namespace compalign::testing {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::vector<const char*> argv{"compalign"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

}  // namespace

double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<long double>(a[i]) * b[i];
    aa += static_cast<long double>(a[i]) * a[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  return static_cast<double>(ab / (std::sqrt(aa) * std::sqrt(bb)));
}

std::vector<double> oracle_fuse(const std::vector<double>& global,
                                const std::vector<std::vector<double>>& subs,
                                const std::vector<std::vector<double>>& texts) {
  std::vector<long double> acc(global.begin(), global.end());
  for (std::size_t k = 0; k < subs.size(); ++k) {
    const long double s = oracle_cosine(subs[k], texts[k]);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s * subs[k][i];
  }
  return std::vector<double>(acc.begin(), acc.end());
}

CheckResult check_fusion_oracle(int instances, std::uint64_t seed, double tolerance,
                                double time_limit_s) {
  CheckResult r;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dim_dist(4, 512);
  std::uniform_int_distribution<int> k_dist(0, 8);
  double max_err = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (int n = 0; n < instances; ++n) {
    const std::size_t dim = dim_dist(rng);
    const int k = k_dist(rng);
    const auto global = random_vector(rng, dim);
    std::vector<std::vector<double>> subs, texts;
    std::vector<FusionTerm> terms;
    for (int i = 0; i < k; ++i) {
      subs.push_back(random_vector(rng, dim));
      texts.push_back(random_vector(rng, dim));
      terms.push_back(FusionTerm{"t" + std::to_string(i), EmbeddingVector(subs.back()),
                                 EmbeddingVector(texts.back())});
    }
    std::shuffle(terms.begin(), terms.end(), rng);
    const auto fused = fuse_general(EmbeddingVector(global), terms);
    const auto expected = oracle_fuse(global, subs, texts);
    for (std::size_t i = 0; i < dim; ++i) {
      max_err = std::max(max_err, std::abs(fused[i] - expected[i]));
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!(max_err <= tolerance)) r.fail("max error " + fmt("%.3g", max_err));
  if (elapsed >= time_limit_s) r.fail("took " + fmt("%.3f", elapsed) + " s");
  r.detail = std::to_string(instances) + " instances, max error " + fmt("%.3g", max_err) +
             ", " + fmt("%.3f", elapsed) + " s";
  return r;
}

CheckResult check_identity_degeneration(std::uint64_t seed) {
  CheckResult r;
  std::mt19937_64 rng(seed);
  int exact = 0;
  for (int n = 0; n < 200; ++n) {
    const std::size_t dim = 4 + n % 60;
    const EmbeddingVector global(random_vector(rng, dim));
    if (fuse_general(global, {}) != global) r.fail("K=0 changed e_I");
    // Each sub-image lives on its own axis; its text on a different axis.
    std::vector<FusionTerm> terms;
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<double> sub(dim, 0.0), text(dim, 0.0);
      sub[k] = 1.0 + static_cast<double>(n);
      text[k + 1] = 2.0;
      terms.push_back(FusionTerm{"e" + std::to_string(k), EmbeddingVector(sub),
                                 EmbeddingVector(text)});
    }
    if (fuse_general(global, terms) != global) {
      r.fail("zero scores changed e_I");
    } else {
      ++exact;
    }
    const auto t = fuse_triplet(global, terms[0].sub, terms[1].sub, terms[2].sub, terms[0].text,
                                terms[1].text, terms[2].text);
    if (t != global) r.fail("triplet with zero scores changed e_I");
  }

  // All detections absent under the skip policy.
  double max_gap = 0.0;
  for (int n = 0; n < 50; ++n) {
    auto store = std::make_shared<FixtureStore>();
    const auto img = patterned_image(8, 6, n);
    store->add_image_embedding(img.id(), EmbeddingVector(random_vector(rng, 16)));
    const std::string caption = "A man is holding a sign";
    for (const char* text : {"A man is holding a sign", "man", "sign", "holding"}) {
      store->add_text_embedding(text, EmbeddingVector(random_vector(rng, 16)));
    }
    FixtureEmbedder embedder(store);
    FixtureDetector detector(store);
    ScoringOptions options;
    options.decompose.policy = DecomposePolicy::kRuleOnly;
    const auto score = score_pair(img, caption, Providers{&embedder, &detector, nullptr}, options);
    max_gap = std::max(max_gap,
                       std::abs(score.fused_similarity.value - score.base_similarity.value));
  }
  if (!(max_gap <= 1e-12)) r.fail("fused differs from base by " + fmt("%.3g", max_gap));
  r.detail = std::to_string(exact) + "/200 exact identities, max |fused-base| " +
             fmt("%.3g", max_gap) + " without detections";
  return r;
}

CheckResult check_cosine_properties(int pairs, std::uint64_t seed) {
  CheckResult r;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dim_dist(1, 64);
  std::uniform_real_distribution<double> scale_dist(1e-3, 1e3);
  std::uniform_real_distribution<double> magnitude(-6, 6);
  double worst_bound = 0, worst_scale = 0, worst_self = 0;
  for (int n = 0; n < pairs; ++n) {
    const std::size_t dim = dim_dist(rng);
    auto av = random_vector(rng, dim);
    auto bv = random_vector(rng, dim);
    const double m = std::pow(10.0, magnitude(rng));
    for (auto& x : av) x *= m;
    const EmbeddingVector a(av), b(bv);
    const double ab = cosine_similarity(a, b).value;
    const double ba = cosine_similarity(b, a).value;
    worst_bound = std::max(worst_bound, std::abs(ab) - 1.0);
    if (std::abs(ab) > 1.0 + 1e-12) r.fail("bound violated: " + fmt("%.17g", ab));
    if (ab != ba) r.fail("asymmetric at pair " + std::to_string(n));
    const double c = scale_dist(rng);
    const double scaled_ab = cosine_similarity(scaled(a, c), b).value;
    worst_scale = std::max(worst_scale, std::abs(scaled_ab - ab));
    if (std::abs(scaled_ab - ab) > 1e-12) r.fail("scale invariance off by " + fmt("%.3g", scaled_ab - ab));
    const double self = cosine_similarity(a, a).value;
    worst_self = std::max(worst_self, std::abs(self - 1.0));
    if (std::abs(self - 1.0) > 1e-12) r.fail("sim(v,v) = " + fmt("%.17g", self));
  }
  r.detail = std::to_string(pairs) + " pairs, max |sim|-1 " + fmt("%.3g", worst_bound) +
             ", max scale drift " + fmt("%.3g", worst_scale) +
             ", max |sim(v,v)-1| " + fmt("%.3g", worst_self);
  return r;
}

namespace {

BoundingBox random_box(std::mt19937_64& rng, int w, int h, int overhang) {
  std::uniform_int_distribution<int> px(0, w - 1), py(0, h - 1);
  const int x = px(rng), y = py(rng);
  return BoundingBox(x, y, std::uniform_int_distribution<int>(1, w - x + overhang)(rng),
                     std::uniform_int_distribution<int>(1, h - y + overhang)(rng));
}

}  // namespace

CheckResult check_geometry_properties(int fixtures, std::uint64_t seed) {
  CheckResult r;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(1, 24);
  std::uniform_int_distribution<int> count(1, 5);
  long pixels_checked = 0;
  for (int n = 0; n < fixtures; ++n) {
    const int w = size(rng), h = size(rng);
    const auto img = patterned_image(w, h, n);
    std::vector<BoundingBox> boxes;
    const int nb = count(rng);
    for (int i = 0; i < nb; ++i) boxes.push_back(random_box(rng, w, h, 3));

    const auto u = union_box(boxes);
    for (const auto& b : boxes) {
      if (!u.contains(b)) r.fail("union does not contain a member box");
    }
    if (union_box(std::vector<BoundingBox>{u}) != u) r.fail("union not idempotent");
    auto shuffled = boxes;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    if (union_box(shuffled) != u) r.fail("union depends on order");

    std::vector<Image> singles;
    for (const auto& b : boxes) {
      const auto m = apply_mask(img, b);
      if (m.width() != w || m.height() != h) r.fail("mask changed dimensions");
      if (apply_mask(m, b) != m) r.fail("mask not idempotent");
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const Rgb expect = b.contains_pixel(x, y) ? img.pixel(x, y) : Rgb{0, 0, 0};
          if (m.pixel(x, y) != expect) r.fail("mask pixel mismatch");
          ++pixels_checked;
        }
      }
      singles.push_back(m);
    }
    const auto multi = apply_multi_mask(img, boxes);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        Rgb mx{0, 0, 0};
        for (const auto& s : singles) {
          const auto p = s.pixel(x, y);
          for (int c = 0; c < 3; ++c) mx[c] = std::max(mx[c], p[c]);
        }
        if (multi.pixel(x, y) != mx) r.fail("multi-mask is not the pixelwise max");
      }
    }
  }
  r.detail = std::to_string(fixtures) + " fixtures, " + std::to_string(pixels_checked) +
             " masked pixels checked";
  return r;
}

CheckResult check_decision_fixtures() {
  CheckResult r;
  struct Case {
    const char* name;
    double pos, neg;
    bool hit;
  };
  const Case cases[] = {{"fig1", 0.2259, 0.2151, true},
                        {"fig5", 0.2052, 0.2069, false},
                        {"fig6", 0.2260, 0.2101, true}};
  std::string pattern;
  for (const auto& c : cases) {
    const bool got = match_decide(Similarity{c.pos}, Similarity{c.neg});
    pattern += got ? "hit " : "miss ";
    if (got != c.hit) r.fail(std::string(c.name) + " decided wrongly");
  }
  r.detail = "pattern " + pattern + "(expected hit miss hit)";
  return r;
}

CheckResult check_parser_suite() {
  CheckResult r;
  const char* subjects[] = {"man", "woman", "dog", "child", "old man", "girl", "brown horse"};
  const char* verbs[] = {"holding", "riding", "chasing", "eating", "throwing", "watching"};
  const char* objects[] = {"sign", "ball", "bicycle", "red apple", "frisbee", "kite", "wooden boat"};
  const char* articles[] = {"A", "The", "An"};
  int parsed = 0;
  for (int i = 0; i < 20; ++i) {
    const std::string s = subjects[i % 7];
    const std::string v = verbs[(i * 5) % 6];
    const std::string o = objects[(i * 3) % 7];
    const std::string copula = i % 2 == 0 ? " is " : " ";
    const std::string caption = std::string(articles[i % 3]) + " " + s + copula + v + " " +
                                articles[(i + 1) % 3] + " " + o + (i % 4 == 0 ? "." : "");
    try {
      const auto d = parse_svo(caption);
      auto phrase_ok = d.entities.size() == 2 && d.entities[0].phrase == s &&
                       d.entities[1].phrase == o && d.relations.size() == 1 &&
                       d.relations[0].predicate == v && d.relations[0].subject == 0 &&
                       d.relations[0].object == 1;
      if (phrase_ok) {
        ++parsed;
      } else {
        r.fail("wrong triplet for '" + caption + "'");
      }
    } catch (const Error& e) {
      r.fail("rejected '" + caption + "': " + e.what());
    }
  }
  const char* rejects[] = {"Sunset over mountains, golden and vast", "A man", "",
                           "A man is holding", "A dog is chasing the cat and a ball"};
  int rejected = 0;
  for (const char* c : rejects) {
    try {
      parse_svo(c);
      r.fail(std::string("accepted '") + c + "'");
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kUnparseableCaption) {
        ++rejected;
      } else {
        r.fail(std::string("wrong error for '") + c + "'");
      }
    }
  }
  r.detail = std::to_string(parsed) + "/20 exact triplets, " + std::to_string(rejected) +
             "/5 rejects";
  return r;
}

namespace {

ProviderConfig http_config(const MockServer& server, int retry_budget, int timeout_ms = 2000) {
  ProviderConfig c;
  c.kind = ProviderKind::kHttp;
  c.location = server.url();
  c.retry_budget = retry_budget;
  c.timeout_ms = timeout_ms;
  return c;
}

template <class F>
std::string provider_error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kProviderError) return e.what();
    return std::string("wrong code: ") + e.what();
  }
  return "no error";
}

}  // namespace

CheckResult check_wire_protocol() {
  CheckResult r;
  const std::vector<double> awkward{0.1, 1.0 / 3.0, -2.5e-17, 1e-300, 123456.78901234567};
  const Image image = patterned_image(9, 7, 5);

  // Round trips on all four endpoints.
  {
    MockServer server;
    std::string seen_image_id, seen_text, seen_phrase, seen_prompt, seen_auth;
    double seen_threshold = -1;
    server.on("/v1/embed/image", [&](const httplib::Request& req, httplib::Response& res) {
      const auto body = Json::parse(req.body);
      seen_image_id = decode_image(base64_decode(body.at("image_png_b64").get<std::string>())).id();
      seen_auth = req.get_header_value("Authorization");
      res.set_content(dump_compact(Json{{"vector", awkward}}), "application/json");
    });
    server.on("/v1/embed/text", [&](const httplib::Request& req, httplib::Response& res) {
      seen_text = Json::parse(req.body).at("text").get<std::string>();
      res.set_content(dump_compact(Json{{"vector", awkward}}), "application/json");
    });
    server.on("/v1/detect", [&](const httplib::Request& req, httplib::Response& res) {
      const auto body = Json::parse(req.body);
      seen_phrase = body.at("phrase").get<std::string>();
      seen_threshold = body.at("box_threshold").get<double>();
      Json dets = Json::array();
      dets.push_back(Json{{"x", 1.5}, {"y", 0.2}, {"w", 3.0}, {"h", 2.9}, {"confidence", 0.5}});
      dets.push_back(Json{{"x", 0}, {"y", 0}, {"w", 2}, {"h", 2}, {"confidence", 0.2}});
      dets.push_back(Json{{"x", 6}, {"y", 4}, {"w", 10}, {"h", 10}, {"confidence", 0.9}});
      res.set_content(dump_compact(Json{{"detections", dets}}), "application/json");
    });
    server.on("/v1/complete", [&](const httplib::Request& req, httplib::Response& res) {
      seen_prompt = Json::parse(req.body).at("prompt").get<std::string>();
      res.set_content(dump_compact(Json{{"text", "{\"objects\": []}\né\t\"q\""}}),
                      "application/json");
    });
    auto config = http_config(server, 0);
    config.bearer_token = "tok-123";
    const HttpProvider http(config);

    if (http.embed_image(image).values().size() != awkward.size() ||
        !std::equal(awkward.begin(), awkward.end(), http.embed_image(image).values().begin())) {
      r.fail("embed/image vector not bit-exact");
    }
    if (seen_image_id != image.id()) r.fail("embed/image PNG payload does not decode to the image");
    if (seen_auth != "Bearer tok-123") r.fail("bearer token not passed through");
    const std::string text = "gray dog é \"quoted\"";
    const auto tv = http.embed_text(text);
    if (!std::equal(awkward.begin(), awkward.end(), tv.values().begin())) {
      r.fail("embed/text vector not bit-exact");
    }
    if (seen_text != text) r.fail("embed/text request text altered");
    const auto dets = http.detect(image, "man", 0.35);
    const std::vector<Detection> expected{{BoundingBox(6, 4, 3, 3), 0.9, "man"},
                                          {BoundingBox(1, 0, 4, 4), 0.5, "man"}};
    if (dets != expected) r.fail("detect result not clamped, filtered and sorted");
    if (seen_phrase != "man" || seen_threshold != 0.35) r.fail("detect request fields altered");
    const std::string prompt = "Caption: x\n{\"a\": 1}";
    if (http.complete(prompt) != "{\"objects\": []}\né\t\"q\"") r.fail("complete text altered");
    if (seen_prompt != prompt) r.fail("complete prompt altered");
  }

  // Retry budget on 5xx, no retry on 4xx, recovery after one failure.
  int retried_calls = 0;
  {
    MockServer server;
    server.reply("/v1/embed/text", 500, R"({"error":"boom"})");
    const HttpProvider http(http_config(server, 2));
    const auto msg = provider_error_of([&] { http.embed_text("x"); });
    retried_calls = server.calls("/v1/embed/text");
    if (retried_calls != 3) r.fail("5xx attempts " + std::to_string(retried_calls) + ", expected 3");
    if (msg.find("boom") == std::string::npos) r.fail("server error message not surfaced");
  }
  {
    MockServer server;
    server.reply("/v1/embed/text", 400, R"({"error":"bad body"})");
    const HttpProvider http(http_config(server, 2));
    const auto msg = provider_error_of([&] { http.embed_text("x"); });
    if (server.calls("/v1/embed/text") != 1) r.fail("4xx was retried");
    if (msg.find("bad body") == std::string::npos) r.fail("4xx message not surfaced");
  }
  {
    MockServer server;
    int n = 0;
    server.on("/v1/embed/text", [&](const httplib::Request&, httplib::Response& res) {
      if (n++ == 0) {
        res.status = 503;
        res.set_content(R"({"error":"warming up"})", "application/json");
      } else {
        res.set_content(R"({"vector":[1,2]})", "application/json");
      }
    });
    const HttpProvider http(http_config(server, 1));
    try {
      if (http.embed_text("x") != EmbeddingVector({1, 2})) r.fail("recovered vector wrong");
    } catch (const Error& e) {
      r.fail(std::string("no recovery after one 5xx: ") + e.what());
    }
  }

  // Session dim mismatch.
  {
    MockServer server;
    int n = 0;
    server.on("/v1/embed/text", [&](const httplib::Request&, httplib::Response& res) {
      res.set_content(n++ == 0 ? R"({"vector":[1,2,3,4]})" : R"({"vector":[1,2,3,4,5]})",
                      "application/json");
    });
    const HttpProvider http(http_config(server, 0));
    http.embed_text("a");
    const auto msg = provider_error_of([&] { http.embed_text("b"); });
    if (msg.find("dimension mismatch") == std::string::npos) {
      r.fail("dim mismatch not surfaced: " + msg);
    }
  }

  // Timeout, retried within budget.
  double timeout_elapsed = 0;
  {
    MockServer server;
    server.on("/v1/complete", [](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(400));
      res.set_content(R"({"text":"late"})", "application/json");
    });
    const HttpProvider http(http_config(server, 1, 100));
    const auto start = std::chrono::steady_clock::now();
    const auto msg = provider_error_of([&] { http.complete("p"); });
    timeout_elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (msg.find("failed after 2 attempts") == std::string::npos) {
      r.fail("timeout not reported after budget: " + msg);
    }
    if (server.calls("/v1/complete") > 2) r.fail("timeout retried beyond budget");
    if (timeout_elapsed < 0.2 || timeout_elapsed > 1.5) {
      r.fail("timeout took " + fmt("%.3f", timeout_elapsed) + " s for 2 x 100 ms");
    }
  }

  r.detail = "4 endpoints round-tripped, 5xx attempts " + std::to_string(retried_calls) +
             " for budget 2, timeout path " + fmt("%.2f", timeout_elapsed) + " s";
  return r;
}

CheckResult check_match_fixture(const std::string& fixture_dir, const std::string& scratch_dir) {
  CheckResult r;
  namespace fs = std::filesystem;
  const fs::path dir(fixture_dir);
  const fs::path scratch(scratch_dir);
  auto args = [&](const std::string& out, int workers) {
    return std::vector<std::string>{"match",
                                    "--config", (dir / "config.json").string(),
                                    "--pairs", (dir / "pairs.jsonl").string(),
                                    "--images", (dir / "images.jsonl").string(),
                                    "--out", (scratch / out).string(),
                                    "--workers", std::to_string(workers)};
  };
  std::string table;
  const int c1 = run(args("run1.json", 1), &table);
  const int c2 = run(args("run2.json", 1));
  const int c4 = run(args("run4.json", 4));
  if (c1 != 0 || c2 != 0 || c4 != 0) {
    r.fail("exit codes " + std::to_string(c1) + "/" + std::to_string(c2) + "/" +
           std::to_string(c4) + ": " + table);
    r.detail = "match command failed";
    return r;
  }
  const auto a = read_file(scratch / "run1.json");
  const auto b = read_file(scratch / "run2.json");
  const auto c = read_file(scratch / "run4.json");
  if (a != b) r.fail("reports differ across identical runs");
  if (a != c) r.fail("reports differ between 1 and 4 workers");
  const auto report = Json::parse(a);
  int flips = 0, ok = 0;
  for (const auto& rec : report.at("records")) {
    if (rec.at("status") != "ok") continue;
    ++ok;
    if (rec.at("baseline").at("hit") != rec.at("fused").at("hit")) ++flips;
  }
  if (ok != 6) r.fail(std::to_string(ok) + " of 6 records scored");
  if (flips != 2) r.fail(std::to_string(flips) + " flips, expected 2");
  if (report.at("summary").at("flips") != flips) r.fail("summary flips disagree with records");
  r.detail = std::to_string(flips) + " of " + std::to_string(ok) + " decisions flipped; " +
             std::to_string(a.size()) + "-byte report identical across runs and workers 1/4";
  return r;
}

CheckResult check_retrieval_fixture(const std::string& fixture_dir,
                                    const std::string& scratch_dir) {
  CheckResult r;
  namespace fs = std::filesystem;
  const fs::path dir(fixture_dir);
  const fs::path out = fs::path(scratch_dir) / "retrieval.json";
  std::string log;
  const int code = run({"retrieve", "--config", (dir / "config.json").string(), "--queries",
                        (dir / "queries.jsonl").string(), "--corpus",
                        (dir / "corpus.jsonl").string(), "--topk", "10", "--recall-ks", "1,5",
                        "--out", out.string()},
                       &log);
  if (code != 0) {
    r.fail("retrieve exit " + std::to_string(code) + ": " + log);
    return r;
  }
  const auto report = Json::parse(read_file(out));
  const auto& queries = report.at("queries");
  if (queries.size() != 10) r.fail(std::to_string(queries.size()) + " queries, expected 10");
  if (report.at("corpus").at("images") != 20) r.fail("corpus is not 20 images");
  // Counting oracle over the rankings in the report.
  int before1 = 0, before5 = 0, after1 = 0, after5 = 0, n = 0;
  for (const auto& q : queries) {
    if (q.at("status") != "ok") {
      r.fail("query failed: " + q.value("error", std::string()));
      continue;
    }
    ++n;
    std::vector<std::string> base, rer;
    for (const auto& c : q.at("baseline")) base.push_back(c.at("image_id"));
    for (const auto& c : q.at("reranked")) rer.push_back(c.at("image_id"));
    if (base.size() != 10) r.fail("baseline is not top-10");
    auto sb = base, sr = rer;
    std::sort(sb.begin(), sb.end());
    std::sort(sr.begin(), sr.end());
    if (sb != sr) r.fail("rerank is not a permutation of the baseline");
    const std::string gold = q.at("gold_image_id");
    auto rank = [&](const std::vector<std::string>& v) {
      const auto it = std::find(v.begin(), v.end(), gold);
      return it == v.end() ? 1000 : static_cast<int>(it - v.begin()) + 1;
    };
    before1 += rank(base) <= 1;
    before5 += rank(base) <= 5;
    after1 += rank(rer) <= 1;
    after5 += rank(rer) <= 5;
  }
  const auto pct = [&](int hits) { return n == 0 ? 0.0 : 100.0 * hits / n; };
  const auto& s = report.at("summary");
  const auto& rb = s.at("recall_before");
  const auto& ra = s.at("recall_after");
  if (rb.at("1").get<double>() != pct(before1) || rb.at("5").get<double>() != pct(before5) ||
      ra.at("1").get<double>() != pct(after1) || ra.at("5").get<double>() != pct(after5)) {
    r.fail("reported recall disagrees with the counting oracle");
  }
  const double gain = pct(after1) - pct(before1);
  if (!(gain >= 10.0)) r.fail("R@1 gain " + fmt("%.1f", gain) + " points");
  r.detail = "R@1 " + fmt("%.0f", pct(before1)) + " -> " + fmt("%.0f", pct(after1)) + ", R@5 " +
             fmt("%.0f", pct(before5)) + " -> " + fmt("%.0f", pct(after5)) +
             ", all reranks are permutations";
  return r;
}

}  // namespace compalign::testing
