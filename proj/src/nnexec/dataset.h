// Copyright 2026 The HierNAS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HIERNAS_NNEXEC_DATASET_H_
#define HIERNAS_NNEXEC_DATASET_H_

#include <cstdint>
#include <span>
#include <vector>

#include "nnexec/tensor.h"

namespace hiernas::nn {

struct Dataset {
  Tensor train_x;  // (N, 3, size, size)
  std::vector<int> train_y;
  Tensor val_x;
  std::vector<int> val_y;
  int classes = 0;
};

// Procedural 3-channel images. Class c is a sinusoidal grating oriented at
// angle pi * c / classes with a random phase per image, a weak per-class
// colour tint and Gaussian pixel noise. The first 80% of each class's
// samples form the training split, the rest validation.
Dataset synth_dataset(int classes, int per_class, int size, std::uint64_t seed);

// Rows `indices` of x (and labels of y) as a new batch.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);
std::vector<int> gather_labels(std::span<const int> y, std::span<const std::size_t> indices);

}  // namespace hiernas::nn

#endif  // HIERNAS_NNEXEC_DATASET_H_
