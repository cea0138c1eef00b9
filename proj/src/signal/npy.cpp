// SPDX-License-Identifier: Apache-2.0
#include "megtext/signal/npy.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <regex>
#include <string>
#include <vector>

#include "megtext/error.hpp"

namespace megtext::signal {
namespace {

static_assert(std::endian::native == std::endian::little, "npy I/O assumes a little-endian host");

constexpr char kMagic[] = "\x93NUMPY";

std::filesystem::path sidecar_path(const std::filesystem::path& npy_path) {
  auto p = npy_path;
  p.replace_extension(".json");
  return p;
}

}  // namespace

SampleMatrix read_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RangeError("cannot open " + path.string());
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, kMagic, 6) != 0) throw SchemaError(path.string() + ": not a .npy file");
  unsigned char version[2];
  in.read(reinterpret_cast<char*>(version), 2);
  std::uint32_t header_len = 0;
  if (version[0] == 1) {
    std::uint16_t len16 = 0;
    in.read(reinterpret_cast<char*>(&len16), 2);
    header_len = len16;
  } else {
    in.read(reinterpret_cast<char*>(&header_len), 4);
  }
  std::string header(header_len, '\0');
  in.read(header.data(), header_len);
  if (!in) throw SchemaError(path.string() + ": truncated .npy header");

  std::smatch m;
  static const std::regex descr_re(R"('descr'\s*:\s*'([^']+)')");
  static const std::regex order_re(R"('fortran_order'\s*:\s*(True|False))");
  static const std::regex shape_re(R"('shape'\s*:\s*\(\s*(\d+)\s*,\s*(\d+)\s*,?\s*\))");
  if (!std::regex_search(header, m, descr_re)) throw SchemaError(path.string() + ": missing descr");
  const std::string descr = m[1];
  if (!std::regex_search(header, m, order_re)) throw SchemaError(path.string() + ": missing fortran_order");
  const bool fortran = m[1] == "True";
  if (!std::regex_search(header, m, shape_re)) throw SchemaError(path.string() + ": expected a 2-D array");
  const auto rows = static_cast<Eigen::Index>(std::stoll(m[1]));
  const auto cols = static_cast<Eigen::Index>(std::stoll(m[2]));
  const auto count = static_cast<std::size_t>(rows * cols);

  std::vector<double> data(count);
  if (descr == "<f8") {
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count * sizeof(double)));
  } else if (descr == "<f4") {
    std::vector<float> tmp(count);
    in.read(reinterpret_cast<char*>(tmp.data()), static_cast<std::streamsize>(count * sizeof(float)));
    std::copy(tmp.begin(), tmp.end(), data.begin());
  } else {
    throw SchemaError(path.string() + ": unsupported dtype " + descr);
  }
  if (!in) throw SchemaError(path.string() + ": truncated .npy payload");

  SampleMatrix out(rows, cols);
  if (fortran) {
    out = Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
  } else {
    out = Eigen::Map<const SampleMatrix>(data.data(), rows, cols);
  }
  return out;
}

void write_npy(const std::filesystem::path& path, const SampleMatrix& m) {
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" + std::to_string(m.rows()) + ", " +
                       std::to_string(m.cols()) + "), }";
  // Magic + version + length field + header + '\n' is padded to a multiple of 64.
  const std::size_t unpadded = 6 + 2 + 2 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RangeError("cannot write " + path.string());
  out.write(kMagic, 6);
  const unsigned char version[2] = {1, 0};
  out.write(reinterpret_cast<const char*>(version), 2);
  const auto len16 = static_cast<std::uint16_t>(header.size());
  out.write(reinterpret_cast<const char*>(&len16), 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!out) throw RangeError("short write to " + path.string());
}

void save_recording(const std::filesystem::path& npy_path, const Recording& rec) {
  rec.validate();
  if (npy_path.has_parent_path()) std::filesystem::create_directories(npy_path.parent_path());
  write_npy(npy_path, rec.samples);
  nlohmann::json header{{"channels", rec.channels()},
                        {"time_samples", rec.time_samples()},
                        {"sample_rate_hz", rec.sample_rate_hz},
                        {"channel_names", rec.channel_names}};
  std::ofstream out(sidecar_path(npy_path), std::ios::trunc);
  out << header.dump(2) << '\n';
}

Recording load_recording(const std::filesystem::path& npy_path, double fallback_rate_hz) {
  Recording rec;
  rec.samples = read_npy(npy_path);
  rec.sample_rate_hz = fallback_rate_hz;
  const auto side = sidecar_path(npy_path);
  if (std::filesystem::exists(side)) {
    std::ifstream in(side);
    const auto header = nlohmann::json::parse(in);
    rec.sample_rate_hz = header.at("sample_rate_hz").get<double>();
    if (header.contains("channel_names")) rec.channel_names = header["channel_names"].get<std::vector<std::string>>();
    if (header.at("channels").get<Eigen::Index>() != rec.channels()) {
      throw SchemaError(side.string() + ": channel count disagrees with " + npy_path.string());
    }
  }
  rec.validate();
  return rec;
}

}  // namespace megtext::signal
