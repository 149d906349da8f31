#pragma once

#include <map>
#include <string>
#include <vector>

namespace percept {

enum class TemplateId { T1, T2, T3 };

// The three prompt templates. Each pattern has exactly one [text] slot.
//   T1: "[text] photo."
//   T2: "A photo of [text]."
//   T3: "There is [text] in the photo."
struct PromptTemplate {
  TemplateId id;
  std::string pattern;
};

const PromptTemplate& prompt_template(TemplateId id);
TemplateId template_id_from_string(const std::string& name);
std::string to_string(TemplateId id);

// Slot substitution, nothing else. Capitalization is the registry entry's
// responsibility.
std::string render(const PromptTemplate& tmpl, const std::string& adjective);

// An antonym pair of rendered prompt texts for one attribute.
struct PromptPair {
  std::string attribute;
  std::string positive_text;
  std::string negative_text;
  TemplateId template_id = TemplateId::T1;
};

// Overall-quality adjective presets, runnable by id:
//   good-bad (a), high-low-quality (b), high-low-definition (c)
struct AdjectivePreset {
  std::string id;
  std::string positive;
  std::string negative;
};
const std::vector<AdjectivePreset>& quality_presets();
const AdjectivePreset& quality_preset(const std::string& id);

// Holds adjective pairs per attribute and renders PromptPairs on demand.
// Read-mostly; registration is single-writer.
class PromptRegistry {
 public:
  // Registry pre-loaded with the shipped quality, fine-grained and abstract
  // attribute pairs (all template T1).
  static PromptRegistry with_defaults();
  static PromptRegistry empty();

  PromptPair get_pair(const std::string& attribute) const;
  bool has(const std::string& attribute) const;
  std::vector<std::string> attributes() const;

  void register_pair(const std::string& attribute,
                     const std::string& positive_adjective,
                     const std::string& negative_adjective,
                     TemplateId template_id, bool overwrite = false);

  // Human-editable text format, one record per line:
  //   attribute = Positive adjective | Negative adjective | T1
  void save(const std::string& path) const;
  static PromptRegistry load(const std::string& path);

  bool operator==(const PromptRegistry& other) const {
    return entries_ == other.entries_;
  }

 private:
  struct Entry {
    std::string positive;
    std::string negative;
    TemplateId template_id;
    bool operator==(const Entry&) const = default;
  };
  std::map<std::string, Entry> entries_;
};

}  // namespace percept
