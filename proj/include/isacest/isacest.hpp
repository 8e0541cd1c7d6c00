#pragma once

#include "isacest/numerics.hpp"
#include "isacest/channel.hpp"
#include "isacest/protocol.hpp"
#include "isacest/estimators.hpp"
#include "isacest/dataset.hpp"
#include "isacest/nn/network.hpp"
#include "isacest/nn/adam.hpp"
#include "isacest/nn/architectures.hpp"
#include "isacest/nn/train.hpp"
#include "isacest/nn/inference.hpp"
#include "isacest/nn/params_io.hpp"
#include "isacest/experiment.hpp"
