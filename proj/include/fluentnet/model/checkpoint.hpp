#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "fluentnet/model/fluentnet.hpp"

namespace fluentnet::model {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'F', 'N', 'C', 'K', 'P', 'T', '\0', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename V>
void put(std::ostream& out, const V& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_string(std::ostream& out, const std::string& s) {
  put(out, static_cast<std::uint64_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
template <typename V>
V get(std::istream& in, const std::string& path) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw DataError(path + ": truncated checkpoint");
  return v;
}
inline std::string get_string(std::istream& in, const std::string& path) {
  const auto n = get<std::uint64_t>(in, path);
  if (n > (1u << 30)) throw DataError(path + ": corrupt string length");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw DataError(path + ": truncated checkpoint");
  return s;
}

struct NamedTensor {
  std::string name;
  nn::Shape shape;
  std::vector<double> values;
};

template <typename T>
std::vector<NamedTensor> collect_tensors(FluentNetModel<T>& m) {
  std::vector<NamedTensor> out;
  auto add = [&](const std::string& name, const nn::Tensor<T>& t) {
    out.push_back({name, t.shape, std::vector<double>(t.data.begin(), t.data.end())});
  };
  for (auto* p : m.parameters()) add(p->name, p->value);
  for (auto& [name, st] : m.bn_states()) {
    add(name + ".running_mean", st->running_mean);
    add(name + ".running_var", st->running_var);
  }
  if (!m.stats.empty()) {
    out.push_back({"norm.mean", {m.stats.bins()}, m.stats.mean});
    out.push_back({"norm.stddev", {m.stats.bins()}, m.stats.stddev});
  }
  return out;
}

}  // namespace detail

/// Writes the binary checkpoint to `path` and a JSON manifest to `path + ".json"`.
template <typename T>
void save_checkpoint(FluentNetModel<T>& m, const std::string& path) {
  const std::string config = nlohmann::json(m.config).dump();
  const auto tensors = detail::collect_tensors(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out.write(detail::kCheckpointMagic, sizeof detail::kCheckpointMagic);
  detail::put(out, detail::kCheckpointVersion);
  detail::put_string(out, config);
  detail::put_string(out, synthesis::to_string(m.target));
  detail::put(out, static_cast<std::uint64_t>(tensors.size()));
  for (const auto& t : tensors) {
    detail::put_string(out, t.name);
    detail::put(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) detail::put(out, static_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * sizeof(double)));
  }
  if (!out) throw DataError("I/O failure writing " + path);

  nlohmann::json manifest;
  manifest["format_version"] = detail::kCheckpointVersion;
  manifest["target"] = synthesis::to_string(m.target);
  manifest["config"] = nlohmann::json(m.config);
  manifest["parameter_count"] = m.parameter_count();
  for (const auto& t : tensors) manifest["tensors"].push_back({{"name", t.name}, {"shape", t.shape}});
  std::ofstream(path + ".json", std::ios::trunc) << manifest.dump(2) << '\n';
}

template <typename T>
FluentNetModel<T> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, detail::kCheckpointMagic, sizeof magic) != 0) throw DataError(path + ": not a checkpoint");
  if (detail::get<std::uint32_t>(in, path) != detail::kCheckpointVersion) throw DataError(path + ": unsupported checkpoint version");
  FluentNetConfig config;
  try {
    config = nlohmann::json::parse(detail::get_string(in, path)).get<FluentNetConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": bad config header: " + e.what());
  }
  const auto target = synthesis::disfluency_from_string(detail::get_string(in, path));
  auto m = build_fluentnet<T>(config, target);

  std::map<std::string, nn::Tensor<T>*> slots;
  for (auto* p : m.parameters()) slots[p->name] = &p->value;
  for (auto& [name, st] : m.bn_states()) {
    slots[name + ".running_mean"] = &st->running_mean;
    slots[name + ".running_var"] = &st->running_var;
  }
  const auto count = detail::get<std::uint64_t>(in, path);
  std::size_t filled = 0;
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto name = detail::get_string(in, path);
    const auto rank = detail::get<std::uint32_t>(in, path);
    nn::Shape shape(rank);
    for (auto& d : shape) d = detail::get<std::uint64_t>(in, path);
    std::vector<double> values(nn::shape_size(shape));
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw DataError(path + ": truncated tensor " + name);
    if (name == "norm.mean") {
      m.stats.mean = values;
      continue;
    }
    if (name == "norm.stddev") {
      m.stats.stddev = values;
      continue;
    }
    const auto slot = slots.find(name);
    if (slot == slots.end()) throw DataError(path + ": unexpected tensor " + name);
    if (slot->second->shape != shape) throw DataError(path + ": shape mismatch for " + name);
    slot->second->data.assign(values.begin(), values.end());
    ++filled;
  }
  if (filled != slots.size()) throw DataError(path + ": checkpoint is missing tensors");
  if (m.stats.mean.size() != m.stats.stddev.size()) throw DataError(path + ": inconsistent normalization stats");
  for (auto* p : m.parameters()) p->zero_grad();
  return m;
}

}  // namespace fluentnet::model
