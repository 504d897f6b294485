// Copyright 2026 The knitgrid Authors
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

#include "knitgrid/bench.hpp"
#include "knitgrid/circuit.hpp"
#include "knitgrid/error.hpp"
#include "knitgrid/htn.hpp"
#include "knitgrid/ir.hpp"
#include "knitgrid/knit.hpp"
#include "knitgrid/optimizer.hpp"
#include "knitgrid/parallel.hpp"
#include "knitgrid/partition.hpp"
#include "knitgrid/path.hpp"
#include "knitgrid/qpd.hpp"
#include "knitgrid/rng.hpp"
#include "knitgrid/simulator.hpp"
#include "knitgrid/tensor.hpp"
