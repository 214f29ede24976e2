#include "hvacrl/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hvacrl::nn {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint hex blocks assume a little-endian host");

constexpr int kFormatVersion = 1;
constexpr char kHexDigits[] = "0123456789abcdef";

void append_double_hex(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int b = 0; b < 8; ++b) {
    const unsigned byte = static_cast<unsigned>(bits >> (8 * b)) & 0xffu;
    out.push_back(kHexDigits[byte >> 4]);
    out.push_back(kHexDigits[byte & 0xfu]);
  }
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Mlp& net,
                     const CheckpointInfo& info) {
  nlohmann::json header;
  header["format_version"] = kFormatVersion;
  header["kind"] = info.kind;
  header["layer_sizes"] = net.spec().sizes;
  header["parameter_count"] = net.parameter_count();
  if (info.sigma_floor) header["sigma_floor"] = *info.sigma_floor;
  if (!info.extras.empty()) header["extras"] = info.extras;

  const Eigen::VectorXd flat = net.flatten();
  std::string body;
  body.reserve(static_cast<std::size_t>(flat.size()) * 17 / 8 + 64);
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    append_double_hex(body, flat(i));
    if ((i + 1) % 8 == 0 || i + 1 == flat.size()) body.push_back('\n');
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  f << header.dump() << '\n' << body;
  if (!f) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("checkpoint: empty file " + path.string());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("checkpoint: bad header in " + path.string() + ": " + e.what());
  }
  if (header.value("format_version", -1) != kFormatVersion)
    throw std::runtime_error("checkpoint: unsupported format version in " + path.string());

  LoadedCheckpoint out;
  out.info.kind = header.value("kind", std::string{});
  if (header.contains("sigma_floor")) out.info.sigma_floor = header["sigma_floor"].get<double>();
  if (header.contains("extras"))
    out.info.extras = header["extras"].get<std::map<std::string, double>>();

  MlpSpec spec;
  spec.sizes = header.at("layer_sizes").get<std::vector<int>>();
  out.net = Mlp(spec);

  const std::int64_t count = out.net.parameter_count();
  if (header.contains("parameter_count") && header["parameter_count"].get<std::int64_t>() != count)
    throw std::runtime_error("checkpoint: parameter count disagrees with layer sizes in " +
                             path.string());

  Eigen::VectorXd flat(count);
  std::int64_t idx = 0;
  std::uint64_t bits = 0;
  int nibbles = 0;
  char c;
  while (f.get(c)) {
    if (c == '\n' || c == '\r' || c == ' ') continue;
    const int v = hex_value(c);
    if (v < 0)
      throw std::runtime_error("checkpoint: invalid hex character in " + path.string());
    // Characters arrive most-significant nibble first within each byte,
    // bytes in little-endian order.
    const int byte_index = nibbles / 2;
    const int shift = 8 * byte_index + (nibbles % 2 == 0 ? 4 : 0);
    bits |= static_cast<std::uint64_t>(v) << shift;
    if (++nibbles == 16) {
      if (idx >= count)
        throw std::runtime_error("checkpoint: more parameters than expected in " + path.string());
      double d;
      std::memcpy(&d, &bits, sizeof d);
      flat(idx++) = d;
      bits = 0;
      nibbles = 0;
    }
  }
  if (nibbles != 0)
    throw std::runtime_error("checkpoint: truncated hex payload in " + path.string());
  if (idx != count)
    throw std::runtime_error("checkpoint: expected " + std::to_string(count) +
                             " parameters, found " + std::to_string(idx) + " in " + path.string());
  out.net.unflatten(flat);
  return out;
}

}  // namespace hvacrl::nn
