#include "mmd/catalog.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mmd/error.hpp"

namespace mmd {

std::vector<std::pair<std::string, std::string>> Product::attribute_pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(attrs.size() + 2);
  out.emplace_back(attr::kGender, gender);
  out.emplace_back(attr::kCategory, category);
  for (const auto& kv : attrs) out.push_back(kv);
  return out;
}

std::optional<std::string> Product::value_of(const std::string& attribute) const {
  if (attribute == attr::kGender) return gender;
  if (attribute == attr::kCategory) return category;
  auto it = attrs.find(attribute);
  if (it == attrs.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> product_text_tokens(const Product& p) {
  std::vector<std::string> tokens{p.gender, p.category};
  if (auto color = p.value_of(attr::kColor)) tokens.push_back(*color);
  return tokens;
}

void validate_product(const Product& p, const Vocabulary& vocab) {
  if (p.id.empty()) fail(ErrorKind::Data, "product with empty id");
  if (!vocab.has_value(attr::kGender, p.gender)) {
    fail(ErrorKind::Data, "product " + p.id + ": unknown gender '" + p.gender + "'");
  }
  if (!vocab.has_value(attr::kCategory, p.category)) {
    fail(ErrorKind::Data, "product " + p.id + ": unknown category '" + p.category + "'");
  }
  for (const auto& [a, token] : p.attrs) {
    if (a == attr::kGender || a == attr::kCategory || !vocab.has_attribute(a)) {
      fail(ErrorKind::Data, "product " + p.id + ": unknown attribute '" + a + "'");
    }
    if (!vocab.is_applicable(p.category, a)) {
      fail(ErrorKind::Data, "product " + p.id + ": attribute '" + a +
                                "' not applicable to category '" + p.category + "'");
    }
    if (!vocab.has_value(a, token)) {
      fail(ErrorKind::Data, "product " + p.id + ": unknown value '" + token +
                                "' for attribute '" + a + "'");
    }
  }
}

Catalog::Catalog(std::vector<Product> products) : products_(std::move(products)) {
  by_id_.reserve(products_.size());
  for (std::size_t i = 0; i < products_.size(); ++i) {
    if (!by_id_.emplace(products_[i].id, i).second) {
      fail(ErrorKind::Data, "duplicate product id '" + products_[i].id + "'");
    }
  }
}

std::optional<std::size_t> Catalog::index_of(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const Product& Catalog::at(const std::string& id) const {
  auto idx = index_of(id);
  if (!idx) fail(ErrorKind::NotFound, "unknown product '" + id + "'");
  return products_[*idx];
}

std::string product_id(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "P%06zu", ordinal);
  return buf;
}

Catalog generate_catalog(const Vocabulary& vocab, std::size_t n, SeededRng rng) {
  if (n == 0) fail(ErrorKind::Config, "generate_catalog: n must be >= 1");
  const auto& genders = vocab.genders();
  const auto& categories = vocab.categories();
  std::vector<Product> products;
  products.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Product p;
    p.id = product_id(i + 1);
    p.gender = genders[rng.index(genders.size())];
    p.category = categories[rng.index(categories.size())];
    for (const auto& a : vocab.applicable(p.category)) {
      if (a == attr::kGender || a == attr::kCategory) continue;
      const auto& values = vocab.values(a);
      p.attrs[a] = values[rng.index(values.size())];
    }
    products.push_back(std::move(p));
  }
  return Catalog(std::move(products));
}

nlohmann::json product_to_json(const Product& p) {
  nlohmann::json attrs = nlohmann::json::object();
  for (const auto& [a, t] : p.attrs) attrs[a] = t;
  return {{"id", p.id}, {"gender", p.gender}, {"category", p.category}, {"attrs", attrs}};
}

std::string catalog_to_jsonl(const Catalog& catalog) {
  std::string out;
  for (const auto& p : catalog.products()) {
    out += product_to_json(p).dump();
    out += '\n';
  }
  return out;
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << catalog_to_jsonl(catalog);
}

Catalog parse_catalog_jsonl(std::istream& in, const Vocabulary& vocab) {
  std::vector<Product> products;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "catalog line " + std::to_string(line_no) + ": ";
    Product p;
    try {
      const auto j = nlohmann::json::parse(line);
      p.id = j.at("id").get<std::string>();
      p.gender = j.at("gender").get<std::string>();
      p.category = j.at("category").get<std::string>();
      for (const auto& [a, t] : j.at("attrs").items()) p.attrs[a] = t.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, where + e.what());
    }
    try {
      validate_product(p, vocab);
    } catch (const Error& e) {
      fail(ErrorKind::Parse, where + e.what());
    }
    products.push_back(std::move(p));
  }
  if (products.empty()) std::clog << "warning: catalog is empty\n";
  try {
    return Catalog(std::move(products));
  } catch (const Error& e) {
    fail(ErrorKind::Parse, e.what());
  }
}

Catalog load_catalog(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
  return parse_catalog_jsonl(in, vocab);
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << vocab.to_json().dump(1) << '\n';
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return Vocabulary::from_json(j);
}

namespace {
std::filesystem::path sibling(const std::filesystem::path& catalog, const char* suffix) {
  auto out = catalog;
  out.replace_extension();
  out += suffix;
  return out;
}
}  // namespace

std::filesystem::path vocabulary_path_for(const std::filesystem::path& catalog) {
  return sibling(catalog, ".vocab.json");
}

std::filesystem::path features_path_for(const std::filesystem::path& catalog) {
  return sibling(catalog, ".features.bin");
}

}  // namespace mmd
