# Copyright 2022 Canonical Ltd.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""The numerical experiments, by name."""

from canontilt.experiments.clt import CltErrorSpec, exp_clt_error
from canontilt.experiments.gauss import GaussTemperatureSpec, exp_gauss_temperature
from canontilt.experiments.gibbs import GibbsPhaseSpec, exp_gibbs_phase
from canontilt.experiments.heatbath import HeatBathSpec, exp_heatbath_invariance
from canontilt.experiments.ldp import LdpTemperatureSpec, exp_ldp_temperature
from canontilt.experiments.poisson import PoissonRateSpec, exp_poisson_rate

# name -> (spec class, runner)
EXPERIMENTS = {
    "exp_poisson_rate": (PoissonRateSpec, exp_poisson_rate),
    "exp_gauss_temperature": (GaussTemperatureSpec, exp_gauss_temperature),
    "exp_ldp_temperature": (LdpTemperatureSpec, exp_ldp_temperature),
    "exp_gibbs_phase": (GibbsPhaseSpec, exp_gibbs_phase),
    "exp_heatbath_invariance": (HeatBathSpec, exp_heatbath_invariance),
    "exp_clt_error": (CltErrorSpec, exp_clt_error),
}
