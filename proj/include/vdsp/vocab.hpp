#pragma once
// Token action space for the arithmetic micro-language: format markers, digits,
// operators and inert filler words. Digits double as answer tokens (multi-digit
// answers are digit runs between ABEG/AEND). Immutable once built.

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace vdsp {

enum class TokenRole { FormatMarker, Eos, Digit, Operator, Filler };

std::string role_name(TokenRole role);
TokenRole role_from_name(const std::string& name);

struct VocabConfig {
  int digit_min = 0;
  int digit_max = 9;
  std::string operators = "+-*";  // subset of +-*, unique chars
  int filler_count = 0;
};

class TokenVocabulary {
 public:
  int size() const { return static_cast<int>(surfaces_.size()); }
  const std::string& surface(int id) const { return surfaces_.at(id); }
  TokenRole role(int id) const { return roles_.at(id); }
  int id_of(const std::string& surface) const;  // -1 when absent

  int qbeg() const { return qbeg_; }
  int qend() const { return qend_; }
  int abeg() const { return abeg_; }
  int aend() const { return aend_; }
  int eos() const { return eos_; }

  bool is_digit(int id) const { return roles_.at(id) == TokenRole::Digit; }
  bool is_operator(int id) const { return roles_.at(id) == TokenRole::Operator; }
  bool is_filler(int id) const { return roles_.at(id) == TokenRole::Filler; }
  int digit_value(int id) const;   // 0..9, throws if not a digit
  char operator_char(int id) const;

  const std::vector<int>& digit_ids() const { return digit_ids_; }
  const std::vector<int>& operator_ids() const { return operator_ids_; }
  const std::vector<int>& filler_ids() const { return filler_ids_; }

  int digit_id(int value) const;  // token ID of digit `value`

  // One surface form per line, line number = token ID; roles in a JSON sidecar.
  void save(const std::filesystem::path& tokens_file,
            const std::filesystem::path& roles_file) const;
  static TokenVocabulary load(const std::filesystem::path& tokens_file,
                              const std::filesystem::path& roles_file);

  friend TokenVocabulary build_micro_vocab(const VocabConfig& config);

 private:
  TokenVocabulary() = default;
  void index_roles();

  std::vector<std::string> surfaces_;
  std::vector<TokenRole> roles_;
  std::unordered_map<std::string, int> by_surface_;
  std::vector<int> digit_ids_, operator_ids_, filler_ids_;
  int qbeg_ = -1, qend_ = -1, abeg_ = -1, aend_ = -1, eos_ = -1;
};

// Format-critical tokens exempt from masking: the four structural markers
// plus EOS (unmaskable EOS guarantees termination).
struct ProtectedSet {
  std::vector<int> ids;                     // sorted ascending
  std::vector<std::uint8_t> is_protected;   // length |V|

  bool contains(int id) const { return is_protected[static_cast<std::size_t>(id)] != 0; }
  int size() const { return static_cast<int>(ids.size()); }

  static ProtectedSet from_ids(std::vector<int> ids, int vocab_size);
};

TokenVocabulary build_micro_vocab(const VocabConfig& config);
ProtectedSet protected_ids(const TokenVocabulary& vocab);

}  // namespace vdsp
