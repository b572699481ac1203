#include "lulc/checkpoint.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "lulc/error.hpp"
#include "lulc/io.hpp"

namespace lulc {
namespace {

std::string hex_double(double x) {
  std::array<char, 48> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::hex);
  return std::string(buf.data(), ptr);
}

std::string hex_u64(std::uint64_t x) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(x));
  return std::string(buf.data(), 16);
}

void append_values(std::string& out, const char* key, const Eigen::VectorXd& v) {
  out += std::string(key) + " " + std::to_string(v.size()) + "\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += hex_double(v[i]) + "\n";
}

void append_net(std::string& out, const char* name, const Params& p,
                const nn::AdamState<double>& adam) {
  out += std::string("net ") + name + "\narch";
  for (const auto s : p.layer_sizes()) out += " " + std::to_string(s);
  out += "\n";
  append_values(out, "params", nn::flatten(p));
  out += "adam_step " + std::to_string(adam.step) + "\n";
  append_values(out, "adam_m", nn::flatten(adam.first_moment));
  append_values(out, "adam_v", nn::flatten(adam.second_moment));
}

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  fail(ErrorKind::kCheckpoint, "checkpoint field '" + field + "': " + why);
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::string_view next(const std::string& field) {
    if (pos_ >= text_.size()) bad(field, "unexpected end of file");
    auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    auto line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return line;
  }

  // Expects `key value...` and returns the remainder after `key `.
  std::string_view keyed(const std::string& key) {
    const auto line = next(key);
    if (line.substr(0, key.size()) != key ||
        (line.size() > key.size() && line[key.size()] != ' ')) {
      bad(key, "expected '" + key + "', found '" + std::string(line.substr(0, 40)) + "'");
    }
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string_view{};
  }

  long long keyed_int(const std::string& key) {
    const auto v = keyed(key);
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad(key, "not an integer");
    return out;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

Eigen::VectorXd read_values(LineReader& in, const std::string& key,
                            Eigen::Index expected) {
  const auto n = in.keyed_int(key);
  if (n != expected) {
    bad(key, "expected " + std::to_string(expected) + " values, found " + std::to_string(n));
  }
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto line = in.next(key);
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), x,
                                     std::chars_format::hex);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      bad(key, "malformed value at index " + std::to_string(i));
    }
    v[i] = x;
  }
  return v;
}

void read_net(LineReader& in, const std::string& name, const nn::LayerSizes& sizes,
              Params& params, nn::AdamState<double>& adam) {
  const auto net = in.keyed("net");
  if (net != name) bad("net", "expected '" + name + "'");
  const auto arch = in.keyed("arch");
  std::string expected;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    expected += (i ? " " : "") + std::to_string(sizes[i]);
  }
  if (arch != expected) {
    bad("arch", name + " architecture '" + std::string(arch) + "' does not match '" +
                    expected + "'");
  }
  const auto count = Params::zeros(sizes).parameter_count();
  params = nn::unflatten<double>(read_values(in, "params", count), sizes);
  adam.step = in.keyed_int("adam_step");
  adam.first_moment = nn::unflatten<double>(read_values(in, "adam_m", count), sizes);
  adam.second_moment = nn::unflatten<double>(read_values(in, "adam_v", count), sizes);
}

}  // namespace

std::string format_checkpoint(const TrainerState& state) {
  std::string out = std::string(kCheckpointMagic) + " " +
                    std::to_string(kCheckpointVersion) + "\n";
  out += "seed " + std::to_string(state.seed) + "\n";
  out += "update " + std::to_string(state.update) + "\n";
  out += "rng_streams " + std::to_string(state.rngs.size()) + "\n";
  for (const auto& rng : state.rngs) {
    out += "rng";
    for (const auto w : rng.state()) out += " " + hex_u64(w);
    out += "\n";
  }
  append_net(out, "policy", state.model.policy, state.model.policy_adam);
  append_net(out, "value", state.model.value, state.model.value_adam);
  out += "sha256 " + sha256_hex(out) + "\n";
  return out;
}

TrainerState parse_checkpoint(std::string_view text) {
  const auto marker = text.rfind("sha256 ");
  if (marker == std::string_view::npos || (marker > 0 && text[marker - 1] != '\n')) {
    bad("sha256", "missing digest line");
  }
  const auto digest = trim(text.substr(marker + 7));
  if (digest != sha256_hex(text.substr(0, marker))) bad("sha256", "digest mismatch");

  LineReader in(text.substr(0, marker));
  const auto magic = in.next("magic");
  if (magic != std::string(kCheckpointMagic) + " " + std::to_string(kCheckpointVersion)) {
    bad("magic", "unsupported header '" + std::string(magic) + "'");
  }
  TrainerState state;
  {
    const auto s = in.keyed("seed");
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), state.seed);
    if (ec != std::errc{} || ptr != s.data() + s.size()) bad("seed", "not an unsigned integer");
  }
  state.update = in.keyed_int("update");
  const auto streams = in.keyed_int("rng_streams");
  if (streams < 1 || streams > 4096) bad("rng_streams", "out of range");
  for (long long k = 0; k < streams; ++k) {
    const auto line = in.keyed("rng");
    Xoshiro256::State s{};
    if (line.size() != 4 * 17 - 1) bad("rng", "expected four 16-digit hex words");
    for (std::size_t w = 0; w < 4; ++w) {
      const auto word = line.substr(w * 17, 16);
      auto [ptr, ec] = std::from_chars(word.data(), word.data() + 16, s[w], 16);
      if (ec != std::errc{} || ptr != word.data() + 16) bad("rng", "malformed hex word");
    }
    state.rngs.emplace_back(s);
  }
  read_net(in, "policy", kPolicySizes, state.model.policy, state.model.policy_adam);
  read_net(in, "value", kValueSizes, state.model.value, state.model.value_adam);
  if (!state.model.policy.all_finite() || !state.model.value.all_finite()) {
    bad("params", "non-finite weight");
  }
  return state;
}

void write_checkpoint(const std::filesystem::path& path, const TrainerState& state) {
  write_file_atomic(path, format_checkpoint(state));
}

TrainerState read_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_text_file(path));
}

}  // namespace lulc
