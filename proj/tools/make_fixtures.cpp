// Regenerates the committed end-to-end fixtures under tests/fixtures:
//   match/      six two-alternative records over twelve images, 4-dim world
//   retrieval/  ten queries over a twenty-image corpus, 16-dim world
// Usage: make_fixtures <fixtures-root>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "compalign/backends/fixture_store.hpp"
#include "compalign/core/image_io.hpp"
#include "compalign/decompose/llm_decompose.hpp"
#include "compalign/fusion/fusion.hpp"

namespace fs = std::filesystem;
using namespace compalign;

namespace {

constexpr int kWidth = 32;
constexpr int kHeight = 24;

// Every pixel is nonzero and differs between images, so no two masked
// variants of any fixture image share a digest.
Image patterned(int seed) {
  std::vector<std::uint8_t> rgb;
  rgb.reserve(kWidth * kHeight * 3);
  for (int y = 0; y < kHeight; ++y) {
    for (int x = 0; x < kWidth; ++x) {
      rgb.push_back(static_cast<std::uint8_t>(1 + (seed * 37 + x * 3) % 250));
      rgb.push_back(static_cast<std::uint8_t>(1 + (seed * 11 + y * 5) % 250));
      rgb.push_back(static_cast<std::uint8_t>(1 + (seed * 7 + x * y) % 250));
    }
  }
  return Image(kWidth, kHeight, std::move(rgb));
}

StoredBox stored(const BoundingBox& b, double confidence) {
  return StoredBox{static_cast<double>(b.x()), static_cast<double>(b.y()),
                   static_cast<double>(b.w()), static_cast<double>(b.h()), confidence};
}

void write_jsonl(const fs::path& path, const std::vector<Json>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (const auto& j : lines) out << dump_compact(j) << '\n';
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << dump_report(j);
}

EmbeddingVector unit(std::size_t dim, std::size_t axis) {
  std::vector<double> v(dim, 0.0);
  v[axis] = 1.0;
  return EmbeddingVector(std::move(v));
}

EmbeddingVector mix(double a, const EmbeddingVector& x, double b, const EmbeddingVector& y) {
  std::vector<double> v(x.dim());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * x[i] + b * y[i];
  return EmbeddingVector(std::move(v));
}

// ---------------------------------------------------------------- match

struct Scene {
  std::vector<double> global;
  // subject, object, relation sub-image embeddings; empty = no detections
  std::vector<std::vector<double>> grounded;
};

struct MatchCase {
  const char* caption;
  const char* subject;
  const char* predicate;
  const char* object;
  const char* component;
  Scene positive;
  Scene negative;
};

void make_match(const fs::path& root) {
  const std::vector<double> good_s{0.2, 1, 0, 0}, good_o{0.2, 0, 1, 0}, good_r{0.2, 0.3, 0.3, 1};
  const std::vector<double> bad_s{1, 0.1, 0, 0}, bad_o{1, 0, 0.1, 0}, bad_r{1, 0, 0, 0.1};
  const std::vector<MatchCase> cases{
      {"A man is holding a sign", "man", "holding", "sign", "subject",
       {{1, .9, .9, .9}, {good_s, good_o, good_r}}, {{1, .5, .5, .5}, {bad_s, good_o, bad_r}}},
      {"A dog is chasing a ball", "dog", "chasing", "ball", "object",
       {{1, .8, .8, .8}, {}}, {{1, .4, .6, .4}, {}}},
      {"A woman is throwing a frisbee", "woman", "throwing", "frisbee", "relation",
       {{1, .5, .5, .5}, {good_s, good_o, good_r}}, {{1, .6, .6, .6}, {}}},
      {"A man is swinging a racket", "man", "swinging", "racket", "subject",
       {{1, .4, .6, .6}, {good_s, good_o, good_r}}, {{1, .6, .6, .6}, {bad_s, good_o, bad_r}}},
      {"A cat is watching a bird", "cat", "watching", "bird", "object",
       {{1, .5, .3, .5}, {}}, {{1, .5, .6, .5}, {}}},
      {"A boy is riding a horse", "boy", "riding", "horse", "relation",
       {{1, .7, .7, .7}, {good_s, good_o, good_r}}, {{1, .6, .6, .6}, {bad_s, bad_o, bad_r}}},
  };
  const BoundingBox subj_box(2, 2, 12, 18);
  const BoundingBox obj_box(18, 4, 10, 14);
  const BoundingBox decoy_box(0, 0, 6, 6);

  fs::create_directories(root / "images");
  FixtureStore store;
  std::vector<Json> manifest, pairs;
  std::set<std::string> texts;
  auto add_text = [&](const std::string& text, std::vector<double> v) {
    if (texts.insert(text).second) store.add_text_embedding(text, EmbeddingVector(std::move(v)));
  };

  int seed = 0;
  for (const auto& c : cases) {
    add_text(c.caption, {1, 1, 1, 1});
    add_text(c.subject, {0, 1, 0, 0});
    add_text(c.object, {0, 0, 1, 0});
    add_text(c.predicate, {0, 0, 0, 1});
    std::string ids[2];
    int side = 0;
    for (const Scene* scene : {&c.positive, &c.negative}) {
      const Image image = patterned(++seed);
      const std::string name = "m" + std::to_string(seed) + ".png";
      save_png(image, root / "images" / name);
      manifest.push_back(Json{{"image_id", image.id()}, {"path", "images/" + name}});
      store.add_image_embedding(image.id(), EmbeddingVector(scene->global));
      if (!scene->grounded.empty()) {
        store.add_detections(image.id(), c.subject,
                             {stored(subj_box, 0.9), stored(decoy_box, 0.2)});
        store.add_detections(image.id(), c.object, {stored(obj_box, 0.8)});
        store.add_image_embedding(apply_mask(image, subj_box).id(),
                                  EmbeddingVector(scene->grounded[0]));
        store.add_image_embedding(apply_mask(image, obj_box).id(),
                                  EmbeddingVector(scene->grounded[1]));
        store.add_image_embedding(relation_image(image, subj_box, obj_box).id(),
                                  EmbeddingVector(scene->grounded[2]));
      }
      ids[side++] = image.id();
    }
    pairs.push_back(Json{{"caption", c.caption},
                         {"positive_image_id", ids[0]},
                         {"negative_image_id", ids[1]},
                         {"component", c.component}});
  }
  write_jsonl(root / "images.jsonl", manifest);
  write_jsonl(root / "pairs.jsonl", pairs);
  fs::create_directories(root / "store");
  store.save(root / "store");
  write_json(root / "config.json", Json{{"embedder", "fixture:store"},
                                        {"detector", "fixture:store"},
                                        {"policy", "rule_only"}});
}

// ------------------------------------------------------------ retrieval

struct Query {
  const char* caption;
  Stage1Object objects[3];
  NamedRelation relations[2];
};

void make_retrieval(const fs::path& root) {
  constexpr std::size_t kDim = 16;
  const std::vector<Query> queries{
      {"A red kite flies above a white boat near a tall tree",
       {{"kite", "red"}, {"boat", "white"}, {"tree", "tall"}},
       {{"kite", "above", "boat"}, {"boat", "near", "tree"}}},
      {"A brown dog sleeps on a blue sofa beside a small lamp",
       {{"dog", "brown"}, {"sofa", "blue"}, {"lamp", "small"}},
       {{"dog", "on", "sofa"}, {"sofa", "beside", "lamp"}}},
      {"An old man reads a thick book under a striped umbrella",
       {{"man", "old"}, {"book", "thick"}, {"umbrella", "striped"}},
       {{"man", "reads", "book"}, {"man", "under", "umbrella"}}},
      {"A young girl holds a pink balloon next to a wooden fence",
       {{"girl", "young"}, {"balloon", "pink"}, {"fence", "wooden"}},
       {{"girl", "holds", "balloon"}, {"girl", "next to", "fence"}}},
      {"A black cat watches a yellow bird on a green branch",
       {{"cat", "black"}, {"bird", "yellow"}, {"branch", "green"}},
       {{"cat", "watches", "bird"}, {"bird", "on", "branch"}}},
      {"A tired horse pulls a heavy cart along a dirt road",
       {{"horse", "tired"}, {"cart", "heavy"}, {"road", "dirt"}},
       {{"horse", "pulls", "cart"}, {"cart", "along", "road"}}},
      {"A smiling chef slices a ripe tomato on a metal counter",
       {{"chef", "smiling"}, {"tomato", "ripe"}, {"counter", "metal"}},
       {{"chef", "slices", "tomato"}, {"tomato", "on", "counter"}}},
      {"A little boy kicks an orange ball across a muddy field",
       {{"boy", "little"}, {"ball", "orange"}, {"field", "muddy"}},
       {{"boy", "kicks", "ball"}, {"ball", "across", "field"}}},
      {"A gray pigeon stands on a stone statue in a busy square",
       {{"pigeon", "gray"}, {"statue", "stone"}, {"square", "busy"}},
       {{"pigeon", "on", "statue"}, {"statue", "in", "square"}}},
      {"A silver car waits at a red light beside a tall building",
       {{"car", "silver"}, {"light", "red"}, {"building", "tall"}},
       {{"car", "at", "light"}, {"car", "beside", "building"}}},
  };
  // Gold and distractor global-embedding weights on the query axis.
  const double gold_c[10] = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.7, 0.7, 0.7, -0.3};
  const double distractor_d[10] = {0.6, 0.6, 0.6, 0.6, 0.6, 0.6, 0.5, 0.5, 0.5, 0.6};
  constexpr std::size_t kGrounded = 5;  // queries 0..4 have detections in their gold image
  const BoundingBox boxes[3] = {BoundingBox(1, 1, 10, 10), BoundingBox(12, 3, 9, 12),
                                BoundingBox(22, 8, 9, 14)};

  fs::create_directories(root / "images");
  FixtureStore store;
  std::vector<Json> corpus, query_lines;
  const auto& templates = default_prompt_templates();

  std::vector<Image> gold, distractor;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    gold.push_back(patterned(100 + static_cast<int>(q)));
    distractor.push_back(patterned(200 + static_cast<int>(q)));
  }
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto& query = queries[q];
    const auto axis = unit(kDim, q);
    store.add_text_embedding(query.caption, axis);

    Stage1Record stage1;
    stage1.caption = query.caption;
    Json objects = Json::array();
    Json phrases = Json::array();
    for (const auto& o : query.objects) {
      stage1.objects.push_back(o);
      objects.push_back(Json{{"name", o.name}, {"attribute", *o.attribute}});
      phrases.push_back(*o.attribute + " " + o.name);
    }
    Json relations = Json::array();
    for (const auto& r : query.relations) {
      stage1.relations.push_back(r);
      relations.push_back(
          Json{{"subject", r.subject}, {"predicate", r.predicate}, {"object", r.object}});
    }
    store.add_llm_reply_for_prompt(render_prompt(templates.stage1, query.caption),
                                   Json{{"objects", objects}, {"relations", relations}}.dump());
    store.add_llm_reply_for_prompt(
        render_prompt(templates.stage2, query.caption, stage1.to_json().dump()),
        Json{{"phrases", phrases}, {"relations", relations}}.dump());

    const double c = gold_c[q];
    const double d = distractor_d[q];
    store.add_image_embedding(gold[q].id(),
                              mix(c, axis, std::sqrt(1 - c * c), unit(kDim, 14)));
    store.add_image_embedding(distractor[q].id(),
                              mix(d, axis, std::sqrt(1 - d * d), unit(kDim, 15)));
    for (std::size_t k = 0; k < 3; ++k) {
      const std::string phrase = phrases[k].get<std::string>();
      const auto v = l2_normalize(mix(1.0, axis, 1.0, unit(kDim, 10 + k)));
      store.add_text_embedding(phrase, v);
      if (q < kGrounded) {
        store.add_detections(gold[q].id(), phrase, {stored(boxes[k], 0.9 - 0.1 * k)});
        store.add_image_embedding(apply_mask(gold[q], boxes[k]).id(), v);
      }
    }
    query_lines.push_back(Json{{"caption", query.caption}, {"gold_image_id", gold[q].id()}});
  }
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (const auto* set : {&gold, &distractor}) {
      const Image& image = (*set)[q];
      const std::string name =
          std::string(set == &gold ? "g" : "d") + std::to_string(q) + ".png";
      save_png(image, root / "images" / name);
      corpus.push_back(Json{{"image_id", image.id()}, {"path", "images/" + name}});
    }
  }
  write_jsonl(root / "corpus.jsonl", corpus);
  write_jsonl(root / "queries.jsonl", query_lines);
  fs::create_directories(root / "store");
  store.save(root / "store");
  write_json(root / "config.json", Json{{"embedder", "fixture:store"},
                                        {"detector", "fixture:store"},
                                        {"llm", "fixture:store"},
                                        {"policy", "llm_only"},
                                        {"topk", 10},
                                        {"recall_ks", {1, 5}}});
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_fixtures <fixtures-root>\n");
    return 64;
  }
  try {
    const fs::path root = argv[1];
    make_match(root / "match");
    make_retrieval(root / "retrieval");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "make_fixtures: %s\n", e.what());
    return 1;
  }
  return 0;
}
