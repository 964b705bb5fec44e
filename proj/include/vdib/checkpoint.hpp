// SPDX-License-Identifier: Apache-2.0
//
// Parameter file shared by encoder and decoder. Plain text:
//
//   vdib-checkpoint 1
//   meta k=<k> n_in=<n> hidden=<h> classes=<c> output=<sigmoid|softmax>
//   block <name> <rows> <cols>
//   <cols hexfloat values per line, rows lines>
//   ...
//
// Blocks, in order: encoder.kernel_a (1 x W_a), encoder.kernel_b (1 x W_b),
// encoder.w_ff (k x n_in), encoder.w_fb (1 x k), encoder.gamma (1 x k),
// decoder.w1 (hidden x k*T), decoder.b1 (1 x hidden), decoder.w2
// (classes x hidden), decoder.b2 (1 x classes). Values are printed as
// hexfloats so a save/load cycle reproduces every bit.

#pragma once

#include <filesystem>
#include <iosfwd>

#include "vdib/trainer.hpp"

namespace vdib {

inline constexpr int kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Model& model);
/// Throws ParseError on malformed text, ValidationError on inconsistent shapes.
Model read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace vdib
