#pragma once

#include "rspnet/asymptotics.hpp"
#include "rspnet/commands.hpp"
#include "rspnet/config.hpp"
#include "rspnet/csv.hpp"
#include "rspnet/dynamics.hpp"
#include "rspnet/errors.hpp"
#include "rspnet/graph.hpp"
#include "rspnet/inference.hpp"
#include "rspnet/limit_lemmas.hpp"
#include "rspnet/montecarlo.hpp"
#include "rspnet/rng.hpp"
#include "rspnet/schedule.hpp"
#include "rspnet/special.hpp"
#include "rspnet/version.hpp"
