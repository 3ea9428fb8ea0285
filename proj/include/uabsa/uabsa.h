// Copyright 2026 The uabsa Authors.
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

#ifndef UABSA_UABSA_H_
#define UABSA_UABSA_H_

#include "uabsa/bio.h"
#include "uabsa/checkpoint.h"
#include "uabsa/corpus.h"
#include "uabsa/error.h"
#include "uabsa/eval.h"
#include "uabsa/geo.h"
#include "uabsa/ingest.h"
#include "uabsa/io.h"
#include "uabsa/lcf.h"
#include "uabsa/loss.h"
#include "uabsa/model.h"
#include "uabsa/random.h"
#include "uabsa/synthetic.h"
#include "uabsa/tensor.h"
#include "uabsa/train.h"

#endif  // UABSA_UABSA_H_
