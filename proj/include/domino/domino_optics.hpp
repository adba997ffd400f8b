/*
 * Copyright 2026 The domino-optics Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Umbrella header for the whole library.

#pragma once

#include "domino/fock.hpp"
#include "domino/domino.hpp"
#include "domino/optics.hpp"
#include "domino/measure.hpp"
#include "domino/minimize.hpp"
#include "domino/nogo.hpp"
#include "domino/io.hpp"
