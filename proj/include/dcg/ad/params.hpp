// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dcg Authors

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcg/ad/tape.hpp"

namespace dcg::ad {

// Owns named parameters in creation order. Addresses are stable for the
// lifetime of the store.
class ParamStore {
 public:
  Parameter& create(const std::string& name, Tensor init);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.contains(name); }

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  ParamStore clone() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, Parameter*> index_;
};

// Checkpoint = directory with `params.bin` (raw little-endian float64 in
// manifest order) and `manifest.json` (name, shape, byte offset, byte length
// per tensor, plus free-form metadata).
void save_checkpoint(const ParamStore& params, const std::filesystem::path& dir,
                     const std::string& metadata_json = "{}");
// Loads values into existing parameters; names and shapes must match.
void load_checkpoint(ParamStore& params, const std::filesystem::path& dir);
std::string read_checkpoint_metadata(const std::filesystem::path& dir);

}  // namespace dcg::ad
