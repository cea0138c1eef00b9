// SPDX-License-Identifier: Apache-2.0
#include "megtext/nn/archive.hpp"

#include <cstdint>
#include <fstream>

#include "megtext/error.hpp"

namespace megtext::nn {

namespace {
constexpr char kMagic[8] = {'M', 'E', 'G', 'T', 'N', 'S', 'R', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw SchemaError("truncated tensor archive");
  return v;
}
}  // namespace

void save_tensors(const std::filesystem::path& path, const std::vector<ParamPtr>& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    put<std::uint64_t>(out, params.size());
    for (const auto& p : params) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
      out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
      put<std::int64_t>(out, p->value.rows());
      put<std::int64_t>(out, p->value.cols());
      out.write(reinterpret_cast<const char*>(p->value.data()),
                static_cast<std::streamsize>(p->value.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_tensors(const std::filesystem::path& path, const TensorMap& tensors) {
  std::vector<ParamPtr> params;
  for (const auto& [name, m] : tensors) params.push_back(std::make_shared<Parameter>(name, m));
  save_tensors(path, params);
}

TensorMap load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kMagic))
    throw SchemaError(path.string() + " is not a tensor archive");
  const auto count = get<std::uint64_t>(in);
  TensorMap out;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(in);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw SchemaError("truncated tensor archive");
    const auto rows = get<std::int64_t>(in), cols = get<std::int64_t>(in);
    if (rows < 0 || cols < 0) throw SchemaError("negative tensor shape in archive");
    Mat m(rows, cols);
    if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float))))
      throw SchemaError("truncated tensor archive");
    out.emplace(std::move(name), std::move(m));
  }
  return out;
}

std::size_t assign_tensors(const TensorMap& tensors, const std::vector<ParamPtr>& params, bool require_all) {
  std::size_t n = 0;
  for (const auto& p : params) {
    auto it = tensors.find(p->name);
    if (it == tensors.end()) {
      if (require_all) throw SchemaError("archive lacks tensor '" + p->name + "'");
      continue;
    }
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols())
      throw SchemaError("shape mismatch for tensor '" + p->name + "'");
    p->value = it->second;
    ++n;
  }
  return n;
}

}  // namespace megtext::nn
