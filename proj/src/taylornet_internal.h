/*
 * Copyright 2026 The CAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CAT_SRC_TAYLORNET_INTERNAL_H_
#define CAT_SRC_TAYLORNET_INTERNAL_H_

#include <span>
#include <vector>

#include "cat/taylornet.h"

namespace cat::internal {

// Per-thread buffers for one Tucker term evaluated at one sample.
struct TermScratch {
  std::vector<std::vector<double>> proj;  // I_kj^T dz
  std::vector<double> kron;
  std::vector<double> hidden;  // G_k kron
};

void TermForward(const TuckerTerm& term, std::span<const double> dz,
                 testing_hooks::KroneckerOrder order, TermScratch& s);

// Accumulates the term's parameter gradients into `grad` and dz gradient into
// `dz_grad`. `s` must hold the TermForward state for the same sample.
void TermBackward(const TuckerTerm& term, std::span<const double> dz,
                  const TermScratch& s, std::span<const double> upstream,
                  TuckerTerm& grad, std::span<double> dz_grad);

void SampleForward(const TaylorNet& net, std::span<const double> z,
                   testing_hooks::KroneckerOrder order, TermScratch& s,
                   std::vector<double>& dz, std::span<double> out);

void SampleBackward(const TaylorNet& net, std::span<const double> z,
                    std::span<const double> upstream, TermScratch& s,
                    std::vector<double>& dz, TaylorNet& grad,
                    std::span<double> z_grad);

}  // namespace cat::internal

#endif  // CAT_SRC_TAYLORNET_INTERNAL_H_
