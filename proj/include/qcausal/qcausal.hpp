// Umbrella header.
#pragma once

#include "qcausal/datagen.hpp"
#include "qcausal/dataset.hpp"
#include "qcausal/error.hpp"
#include "qcausal/eval.hpp"
#include "qcausal/graph.hpp"
#include "qcausal/kcit.hpp"
#include "qcausal/kernels.hpp"
#include "qcausal/kta.hpp"
#include "qcausal/pc.hpp"
#include "qcausal/qsim.hpp"
#include "qcausal/random.hpp"
