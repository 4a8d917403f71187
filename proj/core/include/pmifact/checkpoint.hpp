#pragma once

#include <filesystem>

#include "pmifact/losses.hpp"
#include "pmifact/optimizer.hpp"
#include "pmifact/trainer.hpp"

namespace pmifact {

struct Checkpoint {
  LossKind loss = LossKind::hilbert_mle;
  OptimizerConfig optimizer;
  TrainState state;
};

// Binary dump of T, C, biases, optimizer moments, step counter, completed
// epochs and loss trace. Written to a temporary file and renamed into place,
// so a crash never leaves a torn checkpoint behind.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace pmifact
