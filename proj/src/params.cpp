// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#include "dcg/ad/params.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace dcg::ad {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

Parameter& ParamStore::create(const std::string& name, Tensor init) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate parameter " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Tensor(init.rows(), init.cols());
  p->value = std::move(init);
  auto* raw = p.get();
  params_.push_back(std::move(p));
  index_.emplace(name, raw);
  return *raw;
}

Parameter& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter " + name);
  return *it->second;
}

const Parameter& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter " + name);
  return *it->second;
}

std::vector<Parameter*> ParamStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParamStore::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
}

ParamStore ParamStore::clone() const {
  ParamStore out;
  for (const auto& p : params_) out.create(p->name, p->value);
  return out;
}

void save_checkpoint(const ParamStore& params, const std::filesystem::path& dir,
                     const std::string& metadata_json) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "dcg-checkpoint/1";
  manifest["dtype"] = "float64-le";
  manifest["metadata"] = nlohmann::json::parse(metadata_json);
  auto& tensors = manifest["tensors"] = nlohmann::json::array();
  std::ofstream bin(dir / "params.bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + (dir / "params.bin").string());
  std::size_t offset = 0;
  for (const auto* p : params.all()) {
    std::size_t bytes = p->value.data.size() * sizeof(double);
    bin.write(reinterpret_cast<const char*>(p->value.data.data()), static_cast<std::streamsize>(bytes));
    tensors.push_back({{"name", p->name}, {"shape", p->value.shape}, {"offset", offset}, {"bytes", bytes}});
    offset += bytes;
  }
  std::ofstream man(dir / "manifest.json");
  man << manifest.dump(2) << '\n';
}

namespace {

nlohmann::json read_manifest(const std::filesystem::path& dir) {
  std::ifstream man(dir / "manifest.json");
  if (!man) throw std::runtime_error("cannot open " + (dir / "manifest.json").string());
  return nlohmann::json::parse(man);
}

}  // namespace

void load_checkpoint(ParamStore& params, const std::filesystem::path& dir) {
  auto manifest = read_manifest(dir);
  std::ifstream bin(dir / "params.bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + (dir / "params.bin").string());
  std::size_t seen = 0;
  for (const auto& t : manifest.at("tensors")) {
    auto name = t.at("name").get<std::string>();
    auto shape = t.at("shape").get<std::vector<std::size_t>>();
    auto& p = params.at(name);
    if (p.value.shape != shape) {
      throw std::runtime_error("checkpoint shape mismatch for " + name + ": " + p.value.shape_str());
    }
    auto offset = t.at("offset").get<std::size_t>();
    auto bytes = t.at("bytes").get<std::size_t>();
    if (bytes != p.value.data.size() * sizeof(double)) throw std::runtime_error("checkpoint size mismatch for " + name);
    bin.seekg(static_cast<std::streamoff>(offset));
    bin.read(reinterpret_cast<char*>(p.value.data.data()), static_cast<std::streamsize>(bytes));
    if (!bin) throw std::runtime_error("truncated checkpoint payload at " + name);
    ++seen;
  }
  if (seen != params.size()) {
    throw std::runtime_error("checkpoint has " + std::to_string(seen) + " tensors, model expects " +
                             std::to_string(params.size()));
  }
}

std::string read_checkpoint_metadata(const std::filesystem::path& dir) {
  return read_manifest(dir).value("metadata", nlohmann::json::object()).dump();
}

}  // namespace dcg::ad
