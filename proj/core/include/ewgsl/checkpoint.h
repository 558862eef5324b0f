#ifndef EWGSL_CHECKPOINT_H_
#define EWGSL_CHECKPOINT_H_

#include <filesystem>

#include "ewgsl/model.h"

namespace ewgsl {

struct Checkpoint {
  Hyperparameters hyper;
  ModelParams params;
};

// Versioned text format; doubles are written in shortest round-trip form so
// a reloaded model reproduces the original forward pass bit for bit.
void WriteCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint ReadCheckpoint(const std::filesystem::path& path);

}  // namespace ewgsl

#endif  // EWGSL_CHECKPOINT_H_
