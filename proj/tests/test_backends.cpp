#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "compalign/backends/fixture_store.hpp"
#include "compalign/backends/provider_config.hpp"
#include "compalign/core/digest.hpp"
#include "compalign/decompose/llm_decompose.hpp"
#include "compalign/error.hpp"
#include "support/helpers.hpp"

namespace compalign {
namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIoError;
}

std::shared_ptr<const FixtureStore> share(FixtureStore s) {
  return std::make_shared<const FixtureStore>(std::move(s));
}

TEST(FixtureEmbedder, ImageLookup) {
  const auto img = testing::patterned_image(4, 4, 1);
  FixtureStore s;
  s.add_image_embedding(img.id(), EmbeddingVector{0.6, 0.8});
  const FixtureEmbedder e(share(std::move(s)));
  EXPECT_EQ(e.embed_image(img), EmbeddingVector({0.6, 0.8}));
  EXPECT_EQ(code_of([&] { e.embed_image(testing::patterned_image(4, 4, 2)); }),
            ErrorCode::kMissingFixture);
}

TEST(FixtureEmbedder, TextLookupIsExact) {
  FixtureStore s;
  s.add_text_embedding("man", EmbeddingVector{0.1, 0.2});
  const FixtureEmbedder e(share(std::move(s)));
  EXPECT_EQ(e.embed_text("man"), EmbeddingVector({0.1, 0.2}));
  EXPECT_EQ(code_of([&] { e.embed_text("Man"); }), ErrorCode::kMissingFixture);
  EXPECT_EQ(code_of([&] { e.embed_text("man "); }), ErrorCode::kMissingFixture);
  EXPECT_EQ(code_of([&] { e.embed_text(""); }), ErrorCode::kInvalidArgument);
}

TEST(FixtureEmbedder, ConcurrentCallsDoNotCrossTalk) {
  FixtureStore s;
  for (int i = 0; i < 100; ++i) {
    s.add_text_embedding("text " + std::to_string(i), EmbeddingVector{double(i), 1.0});
  }
  const FixtureEmbedder e(share(std::move(s)));
  std::vector<int> wrong(100, 0);
  std::vector<std::thread> threads;
  for (int i = 0; i < 100; ++i) {
    threads.emplace_back([&, i] {
      for (int rep = 0; rep < 20; ++rep) {
        if (e.embed_text("text " + std::to_string(i)) != EmbeddingVector{double(i), 1.0}) {
          ++wrong[i];
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(std::count(wrong.begin(), wrong.end(), 0), 100);
}

TEST(FixtureDetector, LookupFilterAndOrder) {
  const auto img = testing::patterned_image(20, 20, 1);
  FixtureStore s;
  s.add_detections(img.id(), "man", {{1, 1, 5, 5, 0.9}});
  s.add_detections(img.id(), "sign", {{0, 0, 4, 4, 0.2}, {2, 2, 4, 4, 0.5}});
  s.add_detections(img.id(), "tie",
                   {{5, 5, 2, 2, 0.7}, {1, 9, 2, 2, 0.7}, {1, 2, 3, 3, 0.7}, {1, 2, 2, 3, 0.7}});
  s.add_detections(img.id(), "edge", {{15.5, -2, 10, 4.2, 0.6}, {30, 30, 2, 2, 0.9}});
  const FixtureDetector d(share(std::move(s)));

  const auto man = d.detect(img, "man", 0.35);
  ASSERT_EQ(man.size(), 1u);
  EXPECT_EQ(man[0], (Detection{BoundingBox(1, 1, 5, 5), 0.9, "man"}));

  const auto sign = d.detect(img, "sign", 0.35);
  ASSERT_EQ(sign.size(), 1u);
  EXPECT_EQ(sign[0].confidence, 0.5);

  const auto tie = d.detect(img, "tie", 0.35);
  ASSERT_EQ(tie.size(), 4u);
  EXPECT_EQ(tie[0].box, BoundingBox(1, 2, 2, 3));
  EXPECT_EQ(tie[1].box, BoundingBox(1, 2, 3, 3));
  EXPECT_EQ(tie[2].box, BoundingBox(1, 9, 2, 2));
  EXPECT_EQ(tie[3].box, BoundingBox(5, 5, 2, 2));

  const auto edge = d.detect(img, "edge", 0.35);
  ASSERT_EQ(edge.size(), 1u);  // the out-of-frame box is dropped
  EXPECT_EQ(edge[0].box, BoundingBox(15, 0, 5, 3));

  EXPECT_TRUE(d.detect(img, "horse", 0.35).empty());
  EXPECT_EQ(code_of([&] { d.detect(img, "", 0.35); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { d.detect(img, "man", 1.5); }), ErrorCode::kInvalidArgument);
}

TEST(FixtureDetector, NeverBelowThreshold) {
  const auto img = testing::patterned_image(10, 10, 3);
  FixtureStore s;
  std::vector<StoredBox> boxes;
  for (int i = 0; i <= 20; ++i) boxes.push_back({0, 0, 1.0 + i % 9, 1, i / 20.0});
  s.add_detections(img.id(), "p", boxes);
  const FixtureDetector d(share(std::move(s)));
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    const auto out = d.detect(img, "p", t);
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_GE(out[i].confidence, t);
      if (i > 0) {
        EXPECT_TRUE(detection_order(out[i - 1], out[i]));
      }
    }
  }
}

TEST(FixtureLlm, KeyedOnPromptDigest) {
  FixtureStore s;
  s.add_llm_reply(sha256_hex(std::string_view("hello")), "world");
  const FixtureLlm llm(share(std::move(s)));
  EXPECT_EQ(llm.complete("hello"), "world");
  EXPECT_EQ(code_of([&] { llm.complete("hello!"); }), ErrorCode::kMissingFixture);
  EXPECT_EQ(code_of([&] { llm.complete(""); }), ErrorCode::kInvalidArgument);
}

TEST(FixtureLlm, GrayDogStage1Reply) {
  const std::string caption = "A gray dog plays in the sand at the ocean";
  const std::string reply =
      R"({"objects": [{"name": "dog", "attribute": "gray"}, {"name": "sand", "attribute": null}, )"
      R"({"name": "ocean", "attribute": null}], "relations": [{"subject": "dog", )"
      R"("predicate": "plays in", "object": "sand"}]})";
  FixtureStore s;
  s.add_llm_reply_for_prompt(render_prompt(default_prompt_templates().stage1, caption), reply);
  const FixtureLlm llm(share(std::move(s)));
  EXPECT_EQ(llm.complete(render_prompt(default_prompt_templates().stage1, caption)), reply);
  const auto record = decompose_stage1(caption, llm);
  EXPECT_EQ(record.objects.size(), 3u);
}

TEST(FixtureStore, InvariantsOnBuild) {
  FixtureStore s;
  s.add_image_embedding("a", EmbeddingVector{1, 2});
  EXPECT_EQ(s.dim(), 2u);
  EXPECT_EQ(code_of([&] { s.add_text_embedding("t", EmbeddingVector{1, 2, 3}); }),
            ErrorCode::kInvalidFixture);
  EXPECT_EQ(code_of([&] { s.add_image_embedding("a", EmbeddingVector{3, 4}); }),
            ErrorCode::kInvalidFixture);
  EXPECT_EQ(code_of([&] { s.add_detections("a", "p", {{0, 0, 1, 1, 1.5}}); }),
            ErrorCode::kInvalidFixture);
  s.add_detections("a", "p", {});
  EXPECT_EQ(code_of([&] { s.add_detections("a", "p", {}); }), ErrorCode::kInvalidFixture);
  s.add_llm_reply("abc", "r");
  EXPECT_EQ(code_of([&] { s.add_llm_reply("abc", "r2"); }), ErrorCode::kInvalidFixture);
}

TEST(FixtureStore, SaveLoadRoundTrip) {
  testing::TempDir dir("store");
  FixtureStore s;
  s.add_image_embedding("id1", EmbeddingVector{0.1, 1.0 / 3.0});
  s.add_text_embedding("gray dog", EmbeddingVector{-2.5e-17, 7});
  s.add_detections("id1", "gray dog", {{1.5, 2, 3, 4, 0.75}});
  s.add_llm_reply_for_prompt("prompt", "{\"a\": \"\\n\"}");
  s.save(dir.path());
  const auto back = FixtureStore::load(dir.path());
  EXPECT_EQ(*back.image_embedding("id1"), EmbeddingVector({0.1, 1.0 / 3.0}));
  EXPECT_EQ(*back.text_embedding("gray dog"), EmbeddingVector({-2.5e-17, 7}));
  const auto* boxes = back.detections("id1", "gray dog");
  ASSERT_NE(boxes, nullptr);
  EXPECT_EQ((*boxes)[0].x, 1.5);
  EXPECT_EQ((*boxes)[0].confidence, 0.75);
  EXPECT_EQ(*back.llm_reply(sha256_hex(std::string_view("prompt"))), "{\"a\": \"\\n\"}");
  EXPECT_EQ(back.detections("id1", "dog"), nullptr);
}

TEST(FixtureStore, LoadErrors) {
  EXPECT_EQ(code_of([] { FixtureStore::load("/nonexistent/store"); }), ErrorCode::kConfigError);
  testing::TempDir dir("badstore");
  std::ofstream(dir.path() / "text_embeddings.jsonl")
      << "{\"text\": \"a\", \"vector\": [1, 2]}\n\nnot json\n";
  try {
    FixtureStore::load(dir.path());
    ADD_FAILURE() << "loaded a corrupt store";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidFixture);
    EXPECT_NE(std::string(e.what()).find("text_embeddings.jsonl:3"), std::string::npos);
  }
  std::ofstream(dir.path() / "text_embeddings.jsonl", std::ios::trunc)
      << "{\"text\": \"a\", \"vector\": [1, 2]}\n{\"text\": \"b\", \"vector\": [1]}\n";
  EXPECT_EQ(code_of([&] { FixtureStore::load(dir.path()); }), ErrorCode::kInvalidFixture);
  std::ofstream(dir.path() / "text_embeddings.jsonl", std::ios::trunc)
      << "{\"text\": \"a\", \"vector\": []}\n";
  EXPECT_EQ(code_of([&] { FixtureStore::load(dir.path()); }), ErrorCode::kInvalidFixture);
}

TEST(ProviderConfig, ParseSpecs) {
  const auto f = parse_provider_locator("fixture:some/dir");
  EXPECT_EQ(f.kind, ProviderKind::kFixture);
  EXPECT_EQ(f.location, "some/dir");
  EXPECT_EQ(parse_provider_locator("http:localhost:8080").location, "http://localhost:8080");
  EXPECT_EQ(parse_provider_locator("http://10.0.0.1:9/api").location, "http://10.0.0.1:9/api");
  for (const char* bad : {"fixture:", "ftp://x", "http:", "dir"}) {
    EXPECT_EQ(code_of([&] { parse_provider_locator(bad); }), ErrorCode::kConfigError) << bad;
  }
}

TEST(ProviderConfig, ValidateAndEcho) {
  ProviderConfig c;
  c.location = "x";
  EXPECT_NO_THROW(c.validate());
  c.box_threshold = 1.2;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kConfigError);
  c.box_threshold = 0.35;
  c.timeout_ms = 0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kConfigError);
  c.timeout_ms = 10;
  c.retry_budget = -1;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kConfigError);
  c.retry_budget = 2;
  c.bearer_token = "secret";
  EXPECT_EQ(c.to_json().dump().find("secret"), std::string::npos);
}

}  // namespace
}  // namespace compalign
