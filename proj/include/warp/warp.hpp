/*
 * Copyright 2026 the warp authors
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

#pragma once

#include "warp/butler.hpp"
#include "warp/certificate.hpp"
#include "warp/codec.hpp"
#include "warp/common.hpp"
#include "warp/crypto.hpp"
#include "warp/distributor.hpp"
#include "warp/kem.hpp"
#include "warp/keys.hpp"
#include "warp/naming.hpp"
#include "warp/netsim.hpp"
#include "warp/objects.hpp"
#include "warp/policy.hpp"
#include "warp/scenario.hpp"
