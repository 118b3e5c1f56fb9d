#pragma once

#include <map>
#include <string>
#include <vector>

#include "slac/encoder.hpp"
#include "slac/tensor.hpp"

namespace slac {

// Checkpoint directory: manifest.json (hyperparameters + tensor index)
// and weights.bin (little-endian IEEE-754 arrays in manifest order).
// Extras carry optimizer state and anything else that must round-trip
// bit-exactly; meta is free-form run metadata.
struct Checkpoint {
    EncoderParams params;
    std::map<std::string, Tensor> extras;
    std::map<std::string, std::string> meta;
};

// dtype is the storage precision ("f64" or "f32"); compute is always f64
void save_checkpoint(const std::string& dir, const EncoderParams& params,
                     const std::map<std::string, Tensor>& extras = {},
                     const std::map<std::string, std::string>& meta = {},
                     const std::string& dtype = "f64");

Checkpoint load_checkpoint(const std::string& dir);

// tensor names present in the manifest, in manifest order
std::vector<std::string> checkpoint_tensor_names(const std::string& dir);

}  // namespace slac
