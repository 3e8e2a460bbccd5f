// Copyright 2026 The Optilearn Authors. All Rights Reserved.
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

namespace optilearn {

/// Standard normal density.
double normal_pdf(double z);

/// Standard normal CDF, built on erfc so the lower tail keeps full relative precision.
double normal_cdf(double z);

/// Standard normal quantile. Throws InputError unless 0 < p < 1.
double normal_quantile(double p);

}  // namespace optilearn
