/*
Copyright 2026 The noisy_gossip Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include "bounds.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "harness/config.hpp"
#include "harness/ensemble.hpp"
#include "harness/experiment.hpp"
#include "harness/histogram.hpp"
#include "harness/io.hpp"
#include "noise.hpp"
#include "potentials.hpp"
#include "random.hpp"
#include "verify.hpp"
