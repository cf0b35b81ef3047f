#pragma once

#include "ckframe/error.hpp"
#include "ckframe/linalg.hpp"
#include "ckframe/measure_space.hpp"
#include "ckframe/frame_ops.hpp"
#include "ckframe/douglas.hpp"
#include "ckframe/atoms_duals.hpp"
#include "ckframe/problem.hpp"
#include "ckframe/report.hpp"
