// Copyright 2026 the nerkit authors
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

#include "nerkit/chunker.hpp"
#include "nerkit/config.hpp"
#include "nerkit/corpus.hpp"
#include "nerkit/crf.hpp"
#include "nerkit/eval.hpp"
#include "nerkit/model.hpp"
#include "nerkit/rnn.hpp"
#include "nerkit/serialize.hpp"
#include "nerkit/tape.hpp"
#include "nerkit/tensor.hpp"
#include "nerkit/training.hpp"
#include "nerkit/wordrep.hpp"
