#pragma once

#include "biphoton/detection.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/experiments.hpp"
#include "biphoton/inference.hpp"
#include "biphoton/model.hpp"
#include "biphoton/numerics.hpp"
#include "biphoton/record_io.hpp"
#include "biphoton/rng.hpp"
