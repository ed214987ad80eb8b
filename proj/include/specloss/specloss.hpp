// Copyright 2026 The specloss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "specloss/corpus_io.hpp"
#include "specloss/dsp_core.hpp"
#include "specloss/error.hpp"
#include "specloss/lp_mask.hpp"
#include "specloss/metrics.hpp"
#include "specloss/noise_shaping.hpp"
#include "specloss/parallel.hpp"
#include "specloss/stft_losses.hpp"
#include "specloss/toy_optimizer.hpp"
