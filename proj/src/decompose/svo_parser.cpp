#include "compalign/decompose/svo_parser.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "compalign/error.hpp"

namespace compalign {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_article(std::string_view w) {
  const auto l = lower(w);
  return l == "a" || l == "an" || l == "the";
}

bool is_copula(std::string_view w) {
  const auto l = lower(w);
  return l == "is" || l == "are";
}

bool is_word(std::string_view w) {
  if (w.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(w.front()))) return false;
  return std::all_of(w.begin(), w.end(), [](unsigned char c) {
    return std::isalpha(c) || c == '-' || c == '\'';
  });
}

bool is_gerund(std::string_view w) {
  return w.size() > 4 && lower(w.substr(w.size() - 3)) == "ing";
}

EntityPhrase entity_from_words(const std::vector<std::string>& words) {
  std::string attribute;
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    if (!attribute.empty()) attribute += ' ';
    attribute += words[i];
  }
  return make_entity(words.back(), attribute.empty() ? std::nullopt
                                                     : std::optional<std::string>(attribute));
}

CaptionDecomposition make_triplet(std::string_view caption, std::vector<std::string> subject,
                                  std::string predicate, std::vector<std::string> object) {
  CaptionDecomposition d;
  d.caption = std::string(caption);
  d.entities.push_back(entity_from_words(subject));
  d.entities.push_back(entity_from_words(object));
  d.relations.push_back(RelationTuple{0, std::move(predicate), 1});
  d.source = DecompositionSource::kRuleBased;
  return d;
}

[[noreturn]] void unparseable(std::string_view caption) {
  throw Error(ErrorCode::kUnparseableCaption,
              "caption does not match the subject-verb-object template: '" +
                  std::string(caption) + "'");
}

}  // namespace

CaptionDecomposition parse_svo(std::string_view caption) {
  std::string text(caption);
  while (!text.empty() && (std::isspace(static_cast<unsigned char>(text.back())) ||
                           text.back() == '.' || text.back() == '!')) {
    text.pop_back();
  }
  std::vector<std::string> tokens;
  {
    std::istringstream in(text);
    for (std::string t; in >> t;) tokens.push_back(t);
  }
  if (tokens.size() < 3 || !std::all_of(tokens.begin(), tokens.end(), [](const auto& t) {
        return is_word(t);
      })) {
    unparseable(caption);
  }

  const std::size_t n = tokens.size();
  if (is_article(tokens[0])) {
    // article subject+ [copula] verb-ing article object+
    for (std::size_t v = 2; v + 2 < n; ++v) {
      if (!is_gerund(tokens[v]) || !is_article(tokens[v + 1])) continue;
      const std::size_t subject_end = is_copula(tokens[v - 1]) ? v - 1 : v;
      if (subject_end < 2) continue;
      std::vector<std::string> subject(tokens.begin() + 1, tokens.begin() + subject_end);
      std::vector<std::string> object(tokens.begin() + v + 2, tokens.end());
      const bool clean = std::none_of(subject.begin(), subject.end(),
                                      [](const auto& w) { return is_article(w) || is_copula(w); }) &&
                         std::none_of(object.begin(), object.end(),
                                      [](const auto& w) { return is_article(w) || is_copula(w); });
      if (!clean) continue;
      return make_triplet(caption, std::move(subject), tokens[v], std::move(object));
    }
    unparseable(caption);
  }

  if (n == 3 && std::none_of(tokens.begin(), tokens.end(),
                             [](const auto& w) { return is_article(w) || is_copula(w); })) {
    return make_triplet(caption, {tokens[0]}, tokens[1], {tokens[2]});
  }
  unparseable(caption);
}

}  // namespace compalign
