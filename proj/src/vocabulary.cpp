#include "mmd/vocabulary.hpp"

#include <algorithm>
#include <array>
#include <string_view>

#include "mmd/error.hpp"

namespace mmd {

namespace {

enum class Group { Footwear, Upper, Lower, Accessory };

struct NamedCategory {
  std::string_view name;
  Group group;
};

// Footwear first so the footwear-only subset is a prefix of this filtered list.
constexpr std::array kCategories = {
    NamedCategory{"shoes", Group::Footwear},       NamedCategory{"dresses", Group::Upper},
    NamedCategory{"trousers", Group::Lower},       NamedCategory{"shirts", Group::Upper},
    NamedCategory{"sandals", Group::Footwear},     NamedCategory{"tops", Group::Upper},
    NamedCategory{"running shoes", Group::Footwear}, NamedCategory{"jeans", Group::Lower},
    NamedCategory{"formal shoes", Group::Footwear}, NamedCategory{"handbags", Group::Accessory},
    NamedCategory{"sneakers", Group::Footwear},    NamedCategory{"skirts", Group::Lower},
    NamedCategory{"boots", Group::Footwear},       NamedCategory{"t-shirts", Group::Upper},
    NamedCategory{"loafers", Group::Footwear},     NamedCategory{"belts", Group::Accessory},
    NamedCategory{"flip flops", Group::Footwear},  NamedCategory{"jackets", Group::Upper},
    NamedCategory{"heels", Group::Footwear},       NamedCategory{"shorts", Group::Lower},
    NamedCategory{"casual shoes", Group::Footwear}, NamedCategory{"watches", Group::Accessory},
    NamedCategory{"sports shoes", Group::Footwear}, NamedCategory{"sweaters", Group::Upper},
    NamedCategory{"flats", Group::Footwear},       NamedCategory{"leggings", Group::Lower},
    NamedCategory{"slippers", Group::Footwear},    NamedCategory{"sunglasses", Group::Accessory},
    NamedCategory{"moccasins", Group::Footwear},   NamedCategory{"kurtas", Group::Upper},
    NamedCategory{"wedges", Group::Footwear},      NamedCategory{"wallets", Group::Accessory},
    NamedCategory{"clogs", Group::Footwear},       NamedCategory{"blazers", Group::Upper},
    NamedCategory{"espadrilles", Group::Footwear}, NamedCategory{"caps", Group::Accessory},
};

constexpr std::array<std::string_view, 24> kColors = {
    "black", "white", "red", "blue", "green", "brown", "grey", "pink",
    "navy blue", "sky blue", "peach", "violet", "yellow", "orange", "maroon", "beige",
    "olive", "tan", "cream", "teal", "mustard", "purple", "gold", "silver"};

constexpr std::array<std::string_view, 16> kMaterials = {
    "leather", "cotton", "jute", "silk", "suede", "canvas", "mesh", "synthetic",
    "denim", "wool", "linen", "rubber", "polyester", "nylon", "velvet", "satin"};

constexpr std::array<std::string_view, 12> kPatterns = {
    "solid", "floral", "checkered", "woven design", "embellished", "striped",
    "printed", "colourblocked", "textured", "polka dots", "camouflage", "animal print"};

constexpr std::array<std::string_view, 16> kBrands = {
    "Reebok", "Adidas", "John Players", "109F", "Puma", "Nike", "Bata", "Woodland",
    "Red Tape", "Skechers", "Fila", "Crocs", "Clarks", "Metro", "Mochi", "Catwalk"};

struct NamedExtra {
  std::string_view name;
  std::array<bool, 4> groups;  // Footwear, Upper, Lower, Accessory
};

constexpr std::array kExtras = {
    NamedExtra{"sleeves", {false, true, false, false}},
    NamedExtra{"heel height", {true, false, false, false}},
    NamedExtra{"closure", {true, false, false, true}},
    NamedExtra{"neck", {false, true, false, false}},
    NamedExtra{"sole", {true, false, false, false}},
    NamedExtra{"fit", {false, true, true, false}},
    NamedExtra{"toe shape", {true, false, false, false}},
    NamedExtra{"length", {false, true, true, false}},
    NamedExtra{"occasion", {true, true, true, true}},
    NamedExtra{"waist rise", {false, false, true, false}},
    NamedExtra{"strap", {true, false, false, true}},
};

template <typename List>
std::vector<std::string> take_tokens(const List& names, std::size_t count, std::string_view stem) {
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (i < names.size()) {
      out.emplace_back(names[i]);
    } else {
      out.push_back(std::string(stem) + " " + std::to_string(i + 1));
    }
  }
  return out;
}

void require_count(std::size_t count, const char* what) {
  if (count == 0) fail(ErrorKind::Config, std::string("vocabulary: zero count for ") + what);
}

}  // namespace

VocabularyConfig VocabularyConfig::full_scale() {
  VocabularyConfig c;
  c.categories = 130;
  c.colors = 46;
  c.materials = 65;
  c.patterns = 17;
  c.brands = 160;
  c.extra_attributes = 11;
  c.extra_values = 211;
  return c;
}

VocabularyConfig VocabularyConfig::from_json(const nlohmann::json& j) {
  VocabularyConfig c;
  if (j.value("scale", std::string{"desk"}) == "full") c = full_scale();
  c.categories = j.value("categories", c.categories);
  c.colors = j.value("colors", c.colors);
  c.materials = j.value("materials", c.materials);
  c.patterns = j.value("patterns", c.patterns);
  c.brands = j.value("brands", c.brands);
  c.extra_attributes = j.value("extra_attributes", c.extra_attributes);
  c.extra_values = j.value("extra_values", c.extra_values);
  c.footwear_only = j.value("footwear_only", c.footwear_only);
  return c;
}

Vocabulary Vocabulary::build(const VocabularyConfig& config, SeededRng rng) {
  require_count(config.categories, "categories");
  require_count(config.colors, "colors");
  require_count(config.materials, "materials");
  require_count(config.patterns, "patterns");
  require_count(config.brands, "brands");
  if (config.extra_values < config.extra_attributes) {
    fail(ErrorKind::Config, "vocabulary: every extra attribute needs at least one value");
  }

  Vocabulary v;
  v.attributes_ = {attr::kGender, attr::kCategory, attr::kColor,
                   attr::kMaterial, attr::kPattern, attr::kBrand};
  v.values_[attr::kGender] = {"men", "women"};

  std::vector<NamedCategory> pool;
  for (const auto& c : kCategories) {
    if (!config.footwear_only || c.group == Group::Footwear) pool.push_back(c);
  }
  std::vector<std::string> categories;
  std::vector<Group> groups;
  for (std::size_t i = 0; i < config.categories; ++i) {
    if (i < pool.size()) {
      categories.emplace_back(pool[i].name);
      groups.push_back(pool[i].group);
    } else {
      categories.push_back("category " + std::to_string(i + 1));
      groups.push_back(config.footwear_only ? Group::Footwear
                                            : static_cast<Group>(rng.index(4)));
    }
  }
  v.values_[attr::kCategory] = categories;
  v.values_[attr::kColor] = take_tokens(kColors, config.colors, "color");
  v.values_[attr::kMaterial] = take_tokens(kMaterials, config.materials, "material");
  v.values_[attr::kPattern] = take_tokens(kPatterns, config.patterns, "pattern");
  v.values_[attr::kBrand] = take_tokens(kBrands, config.brands, "brand");

  // Extra attributes: named ones carry a fixed category-group domain; beyond
  // the named list, applicability is drawn per group.
  std::vector<std::array<bool, 4>> extra_groups;
  for (std::size_t e = 0; e < config.extra_attributes; ++e) {
    std::string name;
    std::array<bool, 4> domain{};
    if (e < kExtras.size()) {
      name = std::string(kExtras[e].name);
      domain = kExtras[e].groups;
    } else {
      name = "feature " + std::to_string(e + 1);
      for (auto& g : domain) g = rng.bernoulli(0.5);
    }
    std::size_t count = config.extra_values / config.extra_attributes;
    if (e < config.extra_values % config.extra_attributes) ++count;
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < count; ++i) tokens.push_back(name + " " + std::to_string(i + 1));
    // "sleeves 1" reads poorly; give the common ones readable values.
    if (name == "sleeves") {
      constexpr std::array<std::string_view, 4> kSleeves = {"full sleeves", "half sleeves",
                                                            "sleeveless", "three-quarter sleeves"};
      for (std::size_t i = 0; i < tokens.size() && i < kSleeves.size(); ++i) {
        tokens[i] = std::string(kSleeves[i]);
      }
    } else if (name == "heel height") {
      constexpr std::array<std::string_view, 4> kHeels = {"flat heel", "low heel", "mid heel",
                                                          "high heel"};
      for (std::size_t i = 0; i < tokens.size() && i < kHeels.size(); ++i) {
        tokens[i] = std::string(kHeels[i]);
      }
    }
    v.attributes_.push_back(name);
    v.values_[name] = std::move(tokens);
    extra_groups.push_back(domain);
  }

  for (std::size_t c = 0; c < categories.size(); ++c) {
    std::vector<std::string> applicable(v.attributes_.begin(), v.attributes_.begin() + 6);
    for (std::size_t e = 0; e < extra_groups.size(); ++e) {
      if (extra_groups[e][static_cast<std::size_t>(groups[c])]) {
        applicable.push_back(v.attributes_[6 + e]);
      }
    }
    v.applicability_[categories[c]] = std::move(applicable);
  }

  v.index_tokens();
  return v;
}

void Vocabulary::index_tokens() {
  token_owner_.clear();
  auto claim = [this](const std::string& token, const std::string& owner) {
    if (!token_owner_.emplace(token, owner).second) {
      fail(ErrorKind::Config, "vocabulary: duplicate token '" + token + "'");
    }
  };
  for (const auto& a : attributes_) claim(a, "");
  for (const auto& a : attributes_) {
    auto it = values_.find(a);
    if (it == values_.end() || it->second.empty()) {
      fail(ErrorKind::Config, "vocabulary: attribute '" + a + "' has no values");
    }
    for (const auto& t : it->second) claim(t, a);
  }
  for (const auto& c : values_.at(attr::kCategory)) {
    auto it = applicability_.find(c);
    if (it == applicability_.end() || it->second.empty()) {
      fail(ErrorKind::Config, "vocabulary: category '" + c + "' has no applicable attributes");
    }
  }
}

const std::vector<std::string>& Vocabulary::values(const std::string& attribute) const {
  auto it = values_.find(attribute);
  if (it == values_.end()) fail(ErrorKind::UnknownToken, "unknown attribute '" + attribute + "'");
  return it->second;
}

const std::vector<std::string>& Vocabulary::applicable(const std::string& category) const {
  auto it = applicability_.find(category);
  if (it == applicability_.end()) fail(ErrorKind::UnknownToken, "unknown category '" + category + "'");
  return it->second;
}

bool Vocabulary::is_applicable(const std::string& category, const std::string& attribute) const {
  const auto& list = applicable(category);
  return std::find(list.begin(), list.end(), attribute) != list.end();
}

bool Vocabulary::has_attribute(const std::string& attribute) const {
  return values_.contains(attribute);
}

bool Vocabulary::has_value(const std::string& attribute, const std::string& token) const {
  auto it = token_owner_.find(token);
  return it != token_owner_.end() && it->second == attribute;
}

std::optional<std::string> Vocabulary::attribute_of(const std::string& token) const {
  auto it = token_owner_.find(token);
  if (it == token_owner_.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

bool Vocabulary::contains(const std::string& token) const { return token_owner_.contains(token); }

std::vector<std::string> Vocabulary::all_tokens() const {
  std::vector<std::string> out;
  out.reserve(token_owner_.size());
  for (const auto& [token, owner] : token_owner_) out.push_back(token);
  return out;
}

nlohmann::json Vocabulary::to_json() const {
  nlohmann::json j;
  j["catalog_seed"] = catalog_seed_;
  j["attributes"] = attributes_;
  nlohmann::json values = nlohmann::json::object();
  for (const auto& a : attributes_) values[a] = values_.at(a);
  j["values"] = values;
  nlohmann::json app = nlohmann::json::object();
  for (const auto& c : values_.at(attr::kCategory)) app[c] = applicability_.at(c);
  j["applicability"] = app;
  return j;
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  try {
    v.catalog_seed_ = j.at("catalog_seed").get<std::uint64_t>();
    v.attributes_ = j.at("attributes").get<std::vector<std::string>>();
    for (const auto& a : v.attributes_) {
      v.values_[a] = j.at("values").at(a).get<std::vector<std::string>>();
    }
    for (const auto& [c, list] : j.at("applicability").items()) {
      v.applicability_[c] = list.get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("vocabulary json: ") + e.what());
  }
  if (!v.values_.contains(attr::kGender) || !v.values_.contains(attr::kCategory)) {
    fail(ErrorKind::Parse, "vocabulary json: gender and category attributes are required");
  }
  v.index_tokens();
  return v;
}

}  // namespace mmd
