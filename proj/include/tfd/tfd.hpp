#pragma once

#include "tfd/augment.hpp"
#include "tfd/config.hpp"
#include "tfd/core.hpp"
#include "tfd/decompose.hpp"
#include "tfd/detect.hpp"
#include "tfd/eval.hpp"
#include "tfd/io.hpp"
#include "tfd/nn/autograd.hpp"
#include "tfd/nn/model.hpp"
#include "tfd/nn/tcn.hpp"
#include "tfd/nn/tensor.hpp"
#include "tfd/nn/train.hpp"
#include "tfd/parallel.hpp"
#include "tfd/spectral.hpp"
#include "tfd/synth.hpp"
