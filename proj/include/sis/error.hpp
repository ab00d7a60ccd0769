#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sis {

// Every failure surfaces as an Error carrying a short machine-parseable
// code plus a human message. The CLI prints them as a single
// "error[<code>]: <message>" line and exits nonzero.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

namespace errc {
inline constexpr const char* parse = "parse";
inline constexpr const char* io = "io";
inline constexpr const char* range = "range";
inline constexpr const char* format_version = "format_version";
inline constexpr const char* corrupt = "corrupt";
inline constexpr const char* length_mismatch = "length_mismatch";
inline constexpr const char* dimension_mismatch = "dimension_mismatch";
inline constexpr const char* space_mismatch = "space_mismatch";
inline constexpr const char* negative_value = "negative_value";
inline constexpr const char* not_normalized = "not_normalized";
inline constexpr const char* unused_big_class = "unused_big_class";
inline constexpr const char* duplicate_item = "duplicate_item";
inline constexpr const char* empty_input = "empty_input";
inline constexpr const char* zero_vector = "zero_vector";
inline constexpr const char* missing_feature = "missing_feature";
inline constexpr const char* payload_kind = "payload_kind";
inline constexpr const char* unsupported_payload = "unsupported_payload";
inline constexpr const char* distinct_vectors = "distinct_vectors";
inline constexpr const char* missing_ground_truth = "missing_ground_truth";
inline constexpr const char* missing_scope = "missing_scope";
inline constexpr const char* zero_mass = "zero_mass";
inline constexpr const char* zero_time = "zero_time";
inline constexpr const char* dataset_mismatch = "dataset_mismatch";
inline constexpr const char* bad_config = "bad_config";
}  // namespace errc

}  // namespace sis
