#pragma once

#include "kt/datagen.hpp"
#include "kt/dataset.hpp"
#include "kt/error.hpp"
#include "kt/eval.hpp"
#include "kt/extend.hpp"
#include "kt/hierarchy.hpp"
#include "kt/io.hpp"
#include "kt/kernels.hpp"
#include "kt/parallel.hpp"
#include "kt/rng.hpp"
#include "kt/sym_matrix.hpp"
#include "kt/treelet.hpp"
