#pragma once

#include <iosfwd>
#include <string>

#include "clusternet/model.hpp"
#include "clusternet/train.hpp"

namespace clusternet {

// Binary model container: an 8-byte magic, a format version, a JSON manifest
// (config plus tensor directory), then the tensor payloads as raw
// little-endian doubles in directory order. Round trips are bit-exact.
void save_model(const ModelParameters& params, std::ostream& out,
                const std::string& train_digest = "");
void save_model_file(const ModelParameters& params, const std::string& path,
                     const std::string& train_digest = "");

ModelParameters load_model(std::istream& in);
ModelParameters load_model_file(const std::string& path);

// Digest string stored in a model container ("" when absent).
std::string read_model_digest(const std::string& path);

// Checkpoint container: the model payload plus both Adadelta accumulators
// per tensor and the number of completed steps.
struct Checkpoint {
  ModelParameters params;
  AdadeltaState state;
  int step = 0;
};

void save_checkpoint(const ModelParameters& params, const AdadeltaState& state,
                     int step, std::ostream& out);
void save_checkpoint_file(const ModelParameters& params,
                          const AdadeltaState& state, int step,
                          const std::string& path);

Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace clusternet
