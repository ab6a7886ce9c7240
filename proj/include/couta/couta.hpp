#pragma once

#include "couta/adam.hpp"
#include "couta/autodiff.hpp"
#include "couta/data.hpp"
#include "couta/io.hpp"
#include "couta/network.hpp"
#include "couta/objective.hpp"
#include "couta/perturbation.hpp"
#include "couta/rng.hpp"
#include "couta/scoring.hpp"
#include "couta/synthgen.hpp"
#include "couta/tensor.hpp"
#include "couta/trainer.hpp"
