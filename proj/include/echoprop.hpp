// Copyright 2026 The echoprop Authors
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

// Umbrella header.

#pragma once

#include "echoprop/core.hpp"
#include "echoprop/models.hpp"
#include "echoprop/oscillator.hpp"
#include "echoprop/legendre.hpp"
#include "echoprop/dynamics.hpp"
#include "echoprop/bvp.hpp"
#include "echoprop/oracle.hpp"
#include "echoprop/static_ep.hpp"
#include "echoprop/glep.hpp"
#include "echoprop/rhel.hpp"
#include "echoprop/zoo.hpp"
#include "echoprop/io.hpp"
#include "echoprop/harness/config.hpp"
#include "echoprop/harness/task.hpp"
#include "echoprop/harness/estimators.hpp"
#include "echoprop/harness/train.hpp"
#include "echoprop/harness/compare.hpp"
