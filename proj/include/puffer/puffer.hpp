// Copyright 2026 The Puffer Authors
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

#include "puffer/distribution.hpp"
#include "puffer/error.hpp"
#include "puffer/mechanisms.hpp"
#include "puffer/metric.hpp"
#include "puffer/pair.hpp"
#include "puffer/reference_cases.hpp"
#include "puffer/root_finding.hpp"
#include "puffer/scenarios.hpp"
#include "puffer/tabular.hpp"
#include "puffer/transport.hpp"
#include "puffer/verify.hpp"
