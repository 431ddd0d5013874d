#include "compalign/decompose/prompts.hpp"

#include <fstream>
#include <iterator>

#include "compalign/error.hpp"

namespace compalign {

namespace detail {
extern const std::string_view kBuiltinStage1Prompt;
extern const std::string_view kBuiltinStage2Prompt;
}  // namespace detail

namespace {

std::string read_template(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot read prompt template " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.find("{caption}") == std::string::npos) {
    throw Error(ErrorCode::kConfigError,
                "prompt template " + path.string() + " has no {caption} placeholder");
  }
  return text;
}

}  // namespace

const PromptTemplates& default_prompt_templates() {
  static const PromptTemplates templates{std::string(detail::kBuiltinStage1Prompt),
                                         std::string(detail::kBuiltinStage2Prompt)};
  return templates;
}

PromptTemplates load_prompt_templates(const std::filesystem::path& stage1_path,
                                      const std::filesystem::path& stage2_path) {
  PromptTemplates t = default_prompt_templates();
  if (!stage1_path.empty()) t.stage1 = read_template(stage1_path);
  if (!stage2_path.empty()) t.stage2 = read_template(stage2_path);
  return t;
}

std::string render_prompt(std::string_view tmpl, std::string_view caption,
                          std::string_view stage1_json) {
  // Single pass: substituted values are never rescanned for placeholders.
  static constexpr std::string_view kCaption = "{caption}";
  static constexpr std::string_view kStage1 = "{stage1}";
  std::string out;
  out.reserve(tmpl.size() + caption.size() + stage1_json.size());
  for (std::size_t i = 0; i < tmpl.size();) {
    const auto rest = tmpl.substr(i);
    if (rest.starts_with(kCaption)) {
      out += caption;
      i += kCaption.size();
    } else if (rest.starts_with(kStage1)) {
      out += stage1_json;
      i += kStage1.size();
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

}  // namespace compalign
