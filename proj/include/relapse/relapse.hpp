#pragma once

#include "relapse/data_model.hpp"
#include "relapse/dataset.hpp"
#include "relapse/eval.hpp"
#include "relapse/features.hpp"
#include "relapse/report_io.hpp"
#include "relapse/synth.hpp"
#include "relapse/templates.hpp"
#include "relapse/transform_select.hpp"
#include "relapse/windowing.hpp"
