#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace compalign {

// Prompt templates are UTF-8 text. "{caption}" is replaced with the caption;
// the stage-2 template may also use "{stage1}" for the compact stage-1 JSON.
struct PromptTemplates {
  std::string stage1;
  std::string stage2;
};

const PromptTemplates& default_prompt_templates();

/// Empty paths keep the corresponding default.
PromptTemplates load_prompt_templates(const std::filesystem::path& stage1_path,
                                      const std::filesystem::path& stage2_path);

std::string render_prompt(std::string_view tmpl, std::string_view caption,
                          std::string_view stage1_json = {});

}  // namespace compalign
