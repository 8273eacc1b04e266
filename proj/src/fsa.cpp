#include "mmd/fsa.hpp"

#include <cmath>
#include <fstream>

#include "mmd/error.hpp"

namespace mmd {

namespace {

constexpr std::array kNodes = {FsaNode::Start,     FsaNode::Gender,    FsaNode::Category,
                               FsaNode::GenderCategory, FsaNode::Attribute, FsaNode::ImageClick,
                               FsaNode::End};

FsaNode sample_row(const std::map<FsaNode, double>& row, SeededRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  FsaNode last = FsaNode::End;
  for (const auto& [node, p] : row) {
    if (p <= 0.0) continue;
    acc += p;
    last = node;
    if (u < acc) return node;
  }
  return last;
}

double weight(const std::map<FsaNode, double>& row, FsaNode node) {
  auto it = row.find(node);
  return it == row.end() ? 0.0 : it->second;
}

}  // namespace

std::string_view to_string(FsaNode node) {
  switch (node) {
    case FsaNode::Start: return "start";
    case FsaNode::Gender: return "gender";
    case FsaNode::Category: return "category";
    case FsaNode::GenderCategory: return "gender_category";
    case FsaNode::Attribute: return "attribute";
    case FsaNode::ImageClick: return "image_click";
    case FsaNode::End: return "end";
  }
  return "?";
}

FsaNode fsa_node_from_string(std::string_view name) {
  for (FsaNode n : kNodes) {
    if (to_string(n) == name) return n;
  }
  fail(ErrorKind::Config, "unknown automaton node '" + std::string(name) + "'");
}

bool is_text_node(FsaNode node) {
  return node == FsaNode::Gender || node == FsaNode::Category ||
         node == FsaNode::GenderCategory || node == FsaNode::Attribute;
}

// ---------------------------------------------------------------------------
// DialogContext

void DialogContext::set_category(const std::string& new_category, const Vocabulary& vocab) {
  category = new_category;
  std::erase_if(constraints, [&](const auto& kv) { return !vocab.is_applicable(new_category, kv.first); });
}

Constraints DialogContext::merged() const {
  Constraints out = constraints;
  if (gender) out[attr::kGender] = *gender;
  if (category) out[attr::kCategory] = *category;
  return out;
}

nlohmann::json DialogContext::to_json() const {
  nlohmann::json attrs = nlohmann::json::object();
  for (const auto& [a, t] : constraints) attrs[a] = t;
  return {{"gender", gender ? nlohmann::json(*gender) : nlohmann::json(nullptr)},
          {"category", category ? nlohmann::json(*category) : nlohmann::json(nullptr)},
          {"attrs", attrs}};
}

DialogContext DialogContext::from_json(const nlohmann::json& j) {
  DialogContext c;
  if (j.contains("gender") && !j["gender"].is_null()) c.gender = j["gender"].get<std::string>();
  if (j.contains("category") && !j["category"].is_null()) {
    c.category = j["category"].get<std::string>();
  }
  if (j.contains("attrs")) {
    for (const auto& [a, t] : j["attrs"].items()) c.constraints[a] = t.get<std::string>();
  }
  return c;
}

// ---------------------------------------------------------------------------
// FsaConfig

FsaConfig FsaConfig::defaults() {
  FsaConfig c;
  c.transitions[FsaNode::Start] = {
      {FsaNode::Gender, 0.2}, {FsaNode::Category, 0.5}, {FsaNode::GenderCategory, 0.3}};
  // The category edge out of a text node is the cross-category switch.
  const std::map<FsaNode, double> text_row = {
      {FsaNode::Attribute, 0.4}, {FsaNode::ImageClick, 0.4}, {FsaNode::Category, 0.2}};
  c.transitions[FsaNode::Gender] = text_row;
  c.transitions[FsaNode::Category] = text_row;
  c.transitions[FsaNode::GenderCategory] = text_row;
  // Rows for attribute / image-click apply after the p_end draw: 0.3 and 0.45
  // of the full mass, renormalised.
  const std::map<FsaNode, double> refine_row = {{FsaNode::Attribute, 0.4},
                                                {FsaNode::ImageClick, 0.6}};
  c.transitions[FsaNode::Attribute] = refine_row;
  c.transitions[FsaNode::ImageClick] = refine_row;
  return c;
}

void FsaConfig::validate() const {
  for (FsaNode n : kNodes) {
    if (n == FsaNode::End) continue;
    auto it = transitions.find(n);
    if (it == transitions.end()) {
      fail(ErrorKind::Config, "automaton: no transitions from '" + std::string(to_string(n)) + "'");
    }
    double total = 0.0;
    for (const auto& [to, p] : it->second) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        fail(ErrorKind::Config, "automaton: invalid probability out of '" +
                                    std::string(to_string(n)) + "'");
      }
      if (to == FsaNode::Start) fail(ErrorKind::Config, "automaton: transition into start");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      fail(ErrorKind::Config, "automaton: probabilities out of '" + std::string(to_string(n)) +
                                  "' sum to " + std::to_string(total));
    }
  }
  const auto& start = transitions.at(FsaNode::Start);
  if (weight(start, FsaNode::ImageClick) > 0.0 || weight(start, FsaNode::Attribute) > 0.0 ||
      weight(start, FsaNode::End) > 0.0) {
    fail(ErrorKind::Config, "automaton: the first query must come from a text node");
  }
  if (!(p_context_switch >= 0.0 && p_context_switch <= 1.0)) {
    fail(ErrorKind::Config, "automaton: p_context_switch outside [0,1]");
  }
  if (!(p_end >= 0.0 && p_end <= 1.0)) fail(ErrorKind::Config, "automaton: p_end outside [0,1]");
  if (max_rounds < 1) fail(ErrorKind::Config, "automaton: max_rounds must be >= 1");
  if (display_count < 1) fail(ErrorKind::Config, "automaton: display_count must be >= 1");
  if (!(multiplier_lo > 0.0 && multiplier_lo <= multiplier_hi)) {
    fail(ErrorKind::Config, "automaton: cluster multiplier range must satisfy 0 < lo <= hi");
  }
}

nlohmann::json FsaConfig::to_json() const {
  nlohmann::json t = nlohmann::json::object();
  for (const auto& [from, row] : transitions) {
    nlohmann::json r = nlohmann::json::object();
    for (const auto& [to, p] : row) r[std::string(to_string(to))] = p;
    t[std::string(to_string(from))] = r;
  }
  return {{"transitions", t},
          {"p_context_switch", p_context_switch},
          {"p_end", p_end},
          {"max_rounds", max_rounds},
          {"n1_offset", n1_offset},
          {"display_count", display_count},
          {"cluster_multiplier_range", {multiplier_lo, multiplier_hi}}};
}

FsaConfig FsaConfig::from_json(const nlohmann::json& j) {
  FsaConfig c = defaults();
  try {
    if (j.contains("transitions")) {
      for (const auto& [from, row] : j.at("transitions").items()) {
        std::map<FsaNode, double> parsed;
        for (const auto& [to, p] : row.items()) parsed[fsa_node_from_string(to)] = p.get<double>();
        c.transitions[fsa_node_from_string(from)] = std::move(parsed);
      }
    }
    c.p_context_switch = j.value("p_context_switch", c.p_context_switch);
    c.p_end = j.value("p_end", c.p_end);
    c.max_rounds = j.value("max_rounds", c.max_rounds);
    c.n1_offset = j.value("n1_offset", c.n1_offset);
    c.display_count = j.value("display_count", c.display_count);
    if (j.contains("cluster_multiplier_range")) {
      const auto& r = j.at("cluster_multiplier_range");
      c.multiplier_lo = r.at(0).get<double>();
      c.multiplier_hi = r.at(1).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("automaton config: ") + e.what());
  }
  c.validate();
  return c;
}

FsaConfig load_fsa_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read " + path);
  try {
    return FsaConfig::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

FsaNode step_fsa(FsaNode node, const DialogContext& context, const FsaConfig& config,
                 SeededRng& rng) {
  if (node == FsaNode::End) fail(ErrorKind::InvalidInput, "step_fsa: walk already ended");
  auto it = config.transitions.find(node);
  if (it == config.transitions.end()) {
    fail(ErrorKind::Config, "automaton: no transitions from '" + std::string(to_string(node)) + "'");
  }
  const auto& row = it->second;
  double total = 0.0;
  for (const auto& kv : row) total += kv.second;
  if (std::abs(total - 1.0) > 1e-9) {
    fail(ErrorKind::Config, "automaton: probabilities out of '" + std::string(to_string(node)) +
                                "' are not normalised");
  }

  if ((node == FsaNode::Attribute || node == FsaNode::ImageClick) && rng.uniform() < config.p_end) {
    return FsaNode::End;
  }
  FsaNode next = sample_row(row, rng);
  if (next == FsaNode::Attribute && !context.category) {
    double to_category = weight(row, FsaNode::Category);
    double to_click = weight(row, FsaNode::ImageClick);
    if (to_category + to_click <= 0.0) to_category = to_click = 0.5;
    next = rng.uniform() * (to_category + to_click) < to_category ? FsaNode::Category
                                                                  : FsaNode::ImageClick;
  }
  return next;
}

// ---------------------------------------------------------------------------
// Queries

nlohmann::json QueryEvent::to_json() const {
  nlohmann::json j;
  j["round"] = round;
  if (kind == QueryKind::Text) {
    j["kind"] = "text";
    j["tokens"] = tokens;
    j["context_switch"] = context_switch;
  } else {
    j["kind"] = "image_click";
    j["product_id"] = clicked_id;
  }
  return j;
}

QueryEvent QueryEvent::from_json(const nlohmann::json& j) {
  QueryEvent q;
  q.round = j.at("round").get<std::size_t>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "text") {
    q.kind = QueryKind::Text;
    q.tokens = j.at("tokens").get<std::vector<std::string>>();
    q.context_switch = j.value("context_switch", false);
  } else if (kind == "image_click") {
    q.kind = QueryKind::ImageClick;
    q.clicked_id = j.at("product_id").get<std::string>();
  } else {
    fail(ErrorKind::Parse, "unknown query kind '" + kind + "'");
  }
  return q;
}

namespace {

template <typename T>
const T& pick(const std::vector<T>& v, SeededRng& rng) {
  return v[rng.index(v.size())];
}

std::string pick_other_category(const Vocabulary& vocab, const std::optional<std::string>& current,
                                SeededRng& rng) {
  const auto& cats = vocab.categories();
  if (!current || cats.size() == 1) return pick(cats, rng);
  // Uniform over categories other than the current one.
  std::size_t i = rng.index(cats.size() - 1);
  if (cats[i] == *current) i = cats.size() - 1;
  return cats[i];
}

}  // namespace

QueryEvent gen_text_query(FsaNode node, DialogContext& context, const Vocabulary& vocab,
                          const FsaConfig& config, SeededRng& rng, std::size_t round) {
  if (!is_text_node(node)) {
    fail(ErrorKind::InvalidInput, "gen_text_query: '" + std::string(to_string(node)) +
                                      "' is not a text node");
  }
  QueryEvent q;
  q.kind = QueryKind::Text;
  q.round = round;

  if (!context.empty() && rng.uniform() < config.p_context_switch) {
    // The user switches context: new gender and category, constraints reset.
    const std::string gender = pick(vocab.genders(), rng);
    const std::string category = pick_other_category(vocab, context.category, rng);
    context = DialogContext{gender, category, {}};
    q.tokens = {gender, category};
    q.context_switch = true;
    return q;
  }

  switch (node) {
    case FsaNode::Gender: {
      const std::string g = pick(vocab.genders(), rng);
      context.gender = g;
      q.tokens = {g};
      break;
    }
    case FsaNode::Category: {
      const std::string c = pick_other_category(vocab, context.category, rng);
      context.set_category(c, vocab);
      q.tokens = {c};
      break;
    }
    case FsaNode::GenderCategory: {
      const std::string g = pick(vocab.genders(), rng);
      const std::string c = pick_other_category(vocab, context.category, rng);
      context.gender = g;
      context.set_category(c, vocab);
      q.tokens = {g, c};
      break;
    }
    case FsaNode::Attribute: {
      std::vector<std::string> candidates;
      const auto& pool = context.category ? vocab.applicable(*context.category) : vocab.attributes();
      for (const auto& a : pool) {
        if (a == attr::kGender || a == attr::kCategory) continue;
        // Without a category only attributes common to every category are safe.
        if (!context.category) {
          bool common = true;
          for (const auto& c : vocab.categories()) common = common && vocab.is_applicable(c, a);
          if (!common) continue;
        }
        candidates.push_back(a);
      }
      if (candidates.empty()) {
        fail(ErrorKind::Data, "gen_text_query: no applicable attribute for the current category");
      }
      const std::string a = pick(candidates, rng);
      const std::string t = pick(vocab.values(a), rng);
      context.constraints[a] = t;
      q.tokens = {t};
      break;
    }
    default:
      break;
  }
  return q;
}

void apply_text_query(DialogContext& context, const std::vector<std::string>& tokens,
                      const Vocabulary& vocab) {
  std::vector<std::string> unknown;
  for (const auto& t : tokens) {
    if (!vocab.contains(t)) unknown.push_back(t);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown token(s):";
    for (const auto& t : unknown) msg += " '" + t + "'";
    fail(ErrorKind::UnknownToken, msg);
  }
  for (const auto& t : tokens) {
    const auto a = vocab.attribute_of(t);
    if (a && *a == attr::kGender) context.gender = t;
  }
  for (const auto& t : tokens) {
    const auto a = vocab.attribute_of(t);
    if (a && *a == attr::kCategory) context.set_category(t, vocab);
  }
  for (const auto& t : tokens) {
    const auto a = vocab.attribute_of(t);
    if (!a || *a == attr::kGender || *a == attr::kCategory) continue;
    if (context.category && !vocab.is_applicable(*context.category, *a)) continue;
    context.constraints[*a] = t;
  }
}

}  // namespace mmd
