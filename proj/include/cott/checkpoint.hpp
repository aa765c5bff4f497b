// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "cott/contrastive.hpp"
#include "cott/data.hpp"
#include "cott/encoder.hpp"

namespace cott {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Versioned binary container: magic, version, JSON header (config, vocabulary
// echo, task spec, tensor manifest), then raw little-endian doubles. A
// round-trip reproduces forward outputs bitwise.
void save_checkpoint(const std::string& path, const ReferenceBackbone& backbone,
                     const ProjectionHead& head, const TaskSpec& task,
                     const nlohmann::json& train_config_echo);

struct LoadedCheckpoint {
    std::unique_ptr<ReferenceBackbone> backbone;
    ProjectionHead head;
    TaskSpec task;
    std::shared_ptr<nlohmann::json> train_config_echo;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// Atomic file write used for every output the CLI produces.
void write_file_atomically(const std::string& path, const std::string& contents);

}  // namespace cott
