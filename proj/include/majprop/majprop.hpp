// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "majprop/adapt.hpp"
#include "majprop/circuit.hpp"
#include "majprop/errors.hpp"
#include "majprop/fock.hpp"
#include "majprop/monomial.hpp"
#include "majprop/operator_sum.hpp"
#include "majprop/oracle.hpp"
#include "majprop/parallel.hpp"
#include "majprop/propagation.hpp"
#include "majprop/random.hpp"
#include "majprop/surrogate.hpp"
#include "majprop/theory.hpp"
