#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>

#include "relext/model.hpp"

namespace relext {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary dump of the model config, every named parameter, the RMSprop
/// caches, the trainer RNG state and the epoch cursor. Restoring it and
/// continuing training is bit-identical to never having stopped.
void save_checkpoint(const Trainer& trainer, const std::filesystem::path& path);

struct LoadedCheckpoint {
    std::unique_ptr<RelationModel> model;
    std::unique_ptr<Trainer> trainer;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace relext
