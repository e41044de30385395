// Copyright 2026 The comfortsim Authors
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

#ifndef COMFORTSIM_RESAMPLE_HPP_
#define COMFORTSIM_RESAMPLE_HPP_

#include "comfortsim/timeseries.hpp"

namespace comfortsim {

// Resamples every channel onto a new uniform grid starting at the same time.
// Downsampling first applies a zero-phase 4th-order Butterworth low-pass at
// 0.8 of the new Nyquist frequency; values between samples come from cubic
// Hermite (Catmull-Rom) interpolation. The last new sample lies within one
// new step of the original end. Throws kInvalidRate for new_dt <= 0.
TimeSeries resample(const TimeSeries& ts, double new_dt);

}  // namespace comfortsim

#endif  // COMFORTSIM_RESAMPLE_HPP_
