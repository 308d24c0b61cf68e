// Copyright 2026 The pbekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON documents: dataset, permutation dataset, evaluation report.

#pragma once

#include <filesystem>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "pbekit/errors.hpp"
#include "pbekit/evaluator.hpp"
#include "pbekit/permuter.hpp"
#include "pbekit/proposer.hpp"

namespace pbekit::io {

using Json = nlohmann::ordered_json;

Json to_json(const GeneratorParams& p);
// Rejects unknown keys; missing keys keep their defaults from `base`.
GeneratorParams params_from_json(const Json& j, GeneratorParams base = {});

Json to_json(const PbeInstance& inst);
PbeInstance instance_from_json(const Json& j);

Json to_json(const Dataset& ds);
Dataset dataset_from_json(const Json& j);

Json to_json(const ReorderInstance& inst);
ReorderInstance reorder_instance_from_json(const Json& j);

struct PermDataset {
  GeneratorParams source_params;
  std::size_t order_count_cap = kDefaultOrderCountCap;
  std::vector<ReorderInstance> instances;
};

Json to_json(const PermDataset& ds);
PermDataset perm_dataset_from_json(const Json& j);

Json to_json(const EvalRecord& r);
EvalRecord eval_record_from_json(const Json& j);

Json to_json(const AggregateMetrics& m);
Json to_json(const ReorderAggregate& a);
Json to_json(const BreakdownReports& b);

std::string dump(const Json& j, int indent = 2);
Json read_json_file(const std::filesystem::path& path);
// Writes the document followed by a newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

// Throws ValidationError naming the first key of j not in `allowed`.
void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed,
                         const std::string& where);

// Required field `key` of object j, converted to T; failures name `where`.
template <typename T>
T field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(where + ": missing field '" + key + "'");
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!j.at(key).is_number_unsigned())
      throw ValidationError(where + ": field '" + key + "' must be a non-negative integer");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(where + ": field '" + key + "': " + e.what());
  }
}

}  // namespace pbekit::io
