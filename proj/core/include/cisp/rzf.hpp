// Copyright 2026 The cisp Authors.
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

#pragma once

#include <Eigen/Dense>

#include "cisp/channel.hpp"

namespace cisp {

/// Regularized zero-forcing, W = c H^H (H H^H + alpha I)^-1, with c > 0 chosen per symbol vector
/// so that ||W s||^2 = p0. alpha = 0 is only accepted when H H^H is invertible (K <= Nt, full
/// row rank); otherwise InputError.
Eigen::MatrixXcd rzf_precode(const ChannelMatrix& H, const Eigen::VectorXcd& s, double p0, double alpha);

} // namespace cisp
