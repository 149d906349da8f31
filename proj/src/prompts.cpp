#include "percept/prompts.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "percept/errors.hpp"

namespace percept {

namespace {

const std::array<PromptTemplate, 3> kTemplates = {{
    {TemplateId::T1, "[text] photo."},
    {TemplateId::T2, "A photo of [text]."},
    {TemplateId::T3, "There is [text] in the photo."},
}};

constexpr const char* kSlot = "[text]";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const PromptTemplate& prompt_template(TemplateId id) {
  return kTemplates[static_cast<int>(id)];
}

TemplateId template_id_from_string(const std::string& name) {
  if (name == "T1") return TemplateId::T1;
  if (name == "T2") return TemplateId::T2;
  if (name == "T3") return TemplateId::T3;
  throw ConfigError("unknown template id '" + name + "' (expected T1/T2/T3)");
}

std::string to_string(TemplateId id) {
  switch (id) {
    case TemplateId::T1: return "T1";
    case TemplateId::T2: return "T2";
    case TemplateId::T3: return "T3";
  }
  throw ConfigError("invalid template id");
}

std::string render(const PromptTemplate& tmpl, const std::string& adjective) {
  if (adjective.empty()) {
    throw InputError("render: empty adjective");
  }
  const auto pos = tmpl.pattern.find(kSlot);
  if (pos == std::string::npos) {
    throw ConfigError("template pattern has no [text] slot: " + tmpl.pattern);
  }
  std::string out = tmpl.pattern;
  out.replace(pos, std::string(kSlot).size(), adjective);
  return out;
}

const std::vector<AdjectivePreset>& quality_presets() {
  static const std::vector<AdjectivePreset> presets = {
      {"good-bad", "Good", "Bad"},
      {"high-low-quality", "High quality", "Low quality"},
      {"high-low-definition", "High definition", "Low definition"},
  };
  return presets;
}

const AdjectivePreset& quality_preset(const std::string& id) {
  // Single letters a/b/c are accepted as shorthand.
  static const std::map<std::string, std::string> aliases = {
      {"a", "good-bad"},
      {"b", "high-low-quality"},
      {"c", "high-low-definition"}};
  const auto alias = aliases.find(id);
  const std::string& key = alias == aliases.end() ? id : alias->second;
  for (const auto& p : quality_presets()) {
    if (p.id == key) return p;
  }
  std::string known;
  for (const auto& p : quality_presets()) known += " " + p.id;
  throw ConfigError("unknown quality preset '" + id + "'; known:" + known);
}

PromptRegistry PromptRegistry::with_defaults() {
  PromptRegistry r;
  const TemplateId t1 = TemplateId::T1;
  // Overall quality.
  r.register_pair("quality", "Good", "Bad", t1);
  // Fine-grained quality attributes.
  r.register_pair("brightness", "Bright", "Dark", t1);
  r.register_pair("noisiness", "Clean", "Noisy", t1);
  r.register_pair("colorfulness", "Colorful", "Dull", t1);
  r.register_pair("sharpness", "Sharp", "Blurry", t1);
  r.register_pair("contrast", "High contrast", "Low contrast", t1);
  // Abstract attributes.
  r.register_pair("complex", "Complex", "Simple", t1);
  r.register_pair("natural", "Natural", "Synthetic", t1);
  r.register_pair("happy", "Happy", "Sad", t1);
  r.register_pair("scary", "Scary", "Peaceful", t1);
  r.register_pair("new", "New", "Old", t1);
  r.register_pair("warm", "Warm", "Cold", t1);
  r.register_pair("real", "Real", "Abstract", t1);
  r.register_pair("beautiful", "Beautiful", "Ugly", t1);
  r.register_pair("lonely", "Lonely", "Sociable", t1);
  r.register_pair("relaxing", "Relaxing", "Stressful", t1);
  return r;
}

PromptRegistry PromptRegistry::empty() { return PromptRegistry{}; }

PromptPair PromptRegistry::get_pair(const std::string& attribute) const {
  const auto it = entries_.find(attribute);
  if (it == entries_.end()) {
    std::string known;
    for (const auto& [name, _] : entries_) known += " " + name;
    throw PromptLookupError("unknown attribute '" + attribute +
                            "'; registered:" + known);
  }
  const auto& tmpl = prompt_template(it->second.template_id);
  PromptPair pair;
  pair.attribute = attribute;
  pair.positive_text = render(tmpl, it->second.positive);
  pair.negative_text = render(tmpl, it->second.negative);
  pair.template_id = it->second.template_id;
  return pair;
}

bool PromptRegistry::has(const std::string& attribute) const {
  return entries_.count(attribute) > 0;
}

std::vector<std::string> PromptRegistry::attributes() const {
  std::vector<std::string> names;
  names.reserve(entries_.size());
  for (const auto& [name, _] : entries_) names.push_back(name);
  return names;
}

void PromptRegistry::register_pair(const std::string& attribute,
                                   const std::string& positive_adjective,
                                   const std::string& negative_adjective,
                                   TemplateId template_id, bool overwrite) {
  if (attribute.empty()) throw InputError("register_pair: empty attribute");
  if (positive_adjective.empty() || negative_adjective.empty()) {
    throw InputError("register_pair: empty adjective");
  }
  if (positive_adjective == negative_adjective) {
    throw InputError("register_pair: positive and negative adjectives equal");
  }
  if (!overwrite && entries_.count(attribute)) {
    throw ConflictError("attribute '" + attribute +
                        "' already registered (pass overwrite to replace)");
  }
  entries_[attribute] = Entry{positive_adjective, negative_adjective,
                              template_id};
}

void PromptRegistry::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw AssetError("cannot write registry file: " + path);
  out << "# percept prompt registry\n";
  out << "# attribute = positive adjective | negative adjective | template\n";
  for (const auto& [name, e] : entries_) {
    out << name << " = " << e.positive << " | " << e.negative << " | "
        << to_string(e.template_id) << "\n";
  }
}

PromptRegistry PromptRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AssetError("cannot read registry file: " + path);
  PromptRegistry r;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw AssetError("registry line " + std::to_string(lineno) +
                       ": missing '='");
    }
    const std::string attribute = trim(stripped.substr(0, eq));
    std::string rest = stripped.substr(eq + 1);
    std::array<std::string, 3> fields;
    for (int i = 0; i < 2; ++i) {
      const auto bar = rest.find('|');
      if (bar == std::string::npos) {
        throw AssetError("registry line " + std::to_string(lineno) +
                         ": expected 'pos | neg | template'");
      }
      fields[i] = trim(rest.substr(0, bar));
      rest = rest.substr(bar + 1);
    }
    fields[2] = trim(rest);
    r.register_pair(attribute, fields[0], fields[1],
                    template_id_from_string(fields[2]));
  }
  return r;
}

}  // namespace percept
