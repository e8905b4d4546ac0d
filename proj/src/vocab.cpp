#include "vdsp/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace vdsp {

namespace {
constexpr const char* kMarkerSurfaces[4] = {"QBEG", "QEND", "ABEG", "AEND"};
}

std::string role_name(TokenRole role) {
  switch (role) {
    case TokenRole::FormatMarker: return "format-marker";
    case TokenRole::Eos: return "eos";
    case TokenRole::Digit: return "digit";
    case TokenRole::Operator: return "operator";
    case TokenRole::Filler: return "filler";
  }
  throw std::logic_error("role_name: bad role");
}

TokenRole role_from_name(const std::string& name) {
  if (name == "format-marker") return TokenRole::FormatMarker;
  if (name == "eos") return TokenRole::Eos;
  if (name == "digit") return TokenRole::Digit;
  if (name == "operator") return TokenRole::Operator;
  if (name == "filler") return TokenRole::Filler;
  throw std::invalid_argument("unknown token role: " + name);
}

int TokenVocabulary::id_of(const std::string& surface) const {
  auto it = by_surface_.find(surface);
  return it == by_surface_.end() ? -1 : it->second;
}

int TokenVocabulary::digit_value(int id) const {
  if (!is_digit(id)) throw std::invalid_argument("digit_value: token is not a digit");
  return surfaces_[id][0] - '0';
}

char TokenVocabulary::operator_char(int id) const {
  if (!is_operator(id)) throw std::invalid_argument("operator_char: token is not an operator");
  return surfaces_[id][0];
}

int TokenVocabulary::digit_id(int value) const {
  const int id = id_of(std::string(1, static_cast<char>('0' + value)));
  if (id < 0) throw std::invalid_argument("digit_id: digit not in vocabulary");
  return id;
}

void TokenVocabulary::index_roles() {
  by_surface_.clear();
  digit_ids_.clear();
  operator_ids_.clear();
  filler_ids_.clear();
  for (int id = 0; id < size(); ++id) {
    if (!by_surface_.emplace(surfaces_[id], id).second) {
      throw std::invalid_argument("duplicate token surface: " + surfaces_[id]);
    }
    switch (roles_[id]) {
      case TokenRole::Digit: digit_ids_.push_back(id); break;
      case TokenRole::Operator: operator_ids_.push_back(id); break;
      case TokenRole::Filler: filler_ids_.push_back(id); break;
      case TokenRole::FormatMarker:
      case TokenRole::Eos: break;
    }
  }
  qbeg_ = id_of("QBEG");
  qend_ = id_of("QEND");
  abeg_ = id_of("ABEG");
  aend_ = id_of("AEND");
  eos_ = id_of("EOS");
  if (qbeg_ < 0 || qend_ < 0 || abeg_ < 0 || aend_ < 0 || eos_ < 0) {
    throw std::invalid_argument("vocabulary is missing a format marker or EOS");
  }
}

TokenVocabulary build_micro_vocab(const VocabConfig& config) {
  if (config.operators.empty()) throw std::invalid_argument("invalid-config: empty operator set");
  if (config.digit_min < 0 || config.digit_max > 9 || config.digit_min > config.digit_max) {
    throw std::invalid_argument("invalid-config: digit range must satisfy 0 <= min <= max <= 9");
  }
  if (config.filler_count < 0) throw std::invalid_argument("invalid-config: negative filler count");
  std::set<char> seen;
  for (char c : config.operators) {
    if (c != '+' && c != '-' && c != '*') {
      throw std::invalid_argument(std::string("invalid-config: unknown operator '") + c + "'");
    }
    if (!seen.insert(c).second) {
      throw std::invalid_argument(std::string("invalid-config: duplicate operator '") + c + "'");
    }
  }

  TokenVocabulary v;
  for (const char* m : kMarkerSurfaces) {
    v.surfaces_.emplace_back(m);
    v.roles_.push_back(TokenRole::FormatMarker);
  }
  v.surfaces_.emplace_back("EOS");
  v.roles_.push_back(TokenRole::Eos);
  for (int d = config.digit_min; d <= config.digit_max; ++d) {
    v.surfaces_.push_back(std::string(1, static_cast<char>('0' + d)));
    v.roles_.push_back(TokenRole::Digit);
  }
  for (char c : config.operators) {
    v.surfaces_.push_back(std::string(1, c));
    v.roles_.push_back(TokenRole::Operator);
  }
  for (int i = 0; i < config.filler_count; ++i) {
    v.surfaces_.push_back("f" + std::to_string(i));
    v.roles_.push_back(TokenRole::Filler);
  }
  v.index_roles();
  return v;
}

ProtectedSet protected_ids(const TokenVocabulary& vocab) {
  std::vector<int> ids;
  for (int id = 0; id < vocab.size(); ++id) {
    const TokenRole r = vocab.role(id);
    if (r == TokenRole::FormatMarker || r == TokenRole::Eos) ids.push_back(id);
  }
  return ProtectedSet::from_ids(std::move(ids), vocab.size());
}

ProtectedSet ProtectedSet::from_ids(std::vector<int> ids, int vocab_size) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (!ids.empty() && (ids.front() < 0 || ids.back() >= vocab_size)) {
    throw std::invalid_argument("protected ID outside vocabulary range");
  }
  if (static_cast<int>(ids.size()) >= vocab_size) {
    throw std::invalid_argument("protected set must be strictly smaller than the vocabulary");
  }
  ProtectedSet p;
  p.is_protected.assign(static_cast<std::size_t>(vocab_size), 0);
  for (int id : ids) p.is_protected[static_cast<std::size_t>(id)] = 1;
  p.ids = std::move(ids);
  return p;
}

void TokenVocabulary::save(const std::filesystem::path& tokens_file,
                           const std::filesystem::path& roles_file) const {
  std::ofstream tf(tokens_file);
  if (!tf) throw std::runtime_error("cannot write " + tokens_file.string());
  for (const auto& s : surfaces_) tf << s << '\n';
  tf.close();

  nlohmann::json roles = nlohmann::json::array();
  for (TokenRole r : roles_) roles.push_back(role_name(r));
  std::ofstream rf(roles_file);
  if (!rf) throw std::runtime_error("cannot write " + roles_file.string());
  rf << nlohmann::json{{"roles", roles}}.dump(2) << '\n';
}

TokenVocabulary TokenVocabulary::load(const std::filesystem::path& tokens_file,
                                      const std::filesystem::path& roles_file) {
  std::ifstream tf(tokens_file);
  if (!tf) throw std::runtime_error("cannot read " + tokens_file.string());
  TokenVocabulary v;
  std::string line;
  while (std::getline(tf, line)) v.surfaces_.push_back(line);

  std::ifstream rf(roles_file);
  if (!rf) throw std::runtime_error("cannot read " + roles_file.string());
  nlohmann::json sidecar = nlohmann::json::parse(rf);
  for (const auto& name : sidecar.at("roles")) {
    v.roles_.push_back(role_from_name(name.get<std::string>()));
  }
  if (v.roles_.size() != v.surfaces_.size()) {
    throw std::runtime_error("vocabulary sidecar length does not match token file");
  }
  v.index_roles();
  return v;
}

}  // namespace vdsp
