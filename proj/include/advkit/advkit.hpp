#pragma once

// Umbrella header for the whole toolkit.

#include "attacks.hpp"
#include "checkpoint.hpp"
#include "dataset.hpp"
#include "evaluation.hpp"
#include "gradcheck.hpp"
#include "mlp.hpp"
#include "mnist_idx.hpp"
#include "optimizer.hpp"
#include "oracle.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "synthetic.hpp"
#include "tensor.hpp"
#include "threat.hpp"
#include "train.hpp"
