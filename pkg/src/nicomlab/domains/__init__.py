"""Application domains: facility location, reserve-VCG permits, CPU sharing."""

from nicomlab.domains.auction import (
    VcgConfig,
    build_vcg_class,
    vcg_commitment,
    vcg_domain,
    vcg_mechanism,
    vcg_outcome,
    vcg_utility,
    welfare_objective,
)
from nicomlab.domains.facility import (
    FacilityConfig,
    build_posted_location_class,
    facility_commitment,
    facility_domain,
    facility_objective,
    facility_utility,
)
from nicomlab.domains.resource import (
    ResourceConfig,
    build_resource_classes,
    compositions,
    mmf_allocate,
    resource_commitment,
    resource_domain,
    resource_objective,
    resource_utility,
)

__all__ = [
    "FacilityConfig", "build_posted_location_class", "facility_commitment",
    "facility_domain", "facility_objective", "facility_utility",
    "VcgConfig", "build_vcg_class", "vcg_commitment", "vcg_domain", "vcg_mechanism",
    "vcg_outcome", "vcg_utility", "welfare_objective",
    "ResourceConfig", "build_resource_classes", "compositions", "mmf_allocate",
    "resource_commitment", "resource_domain", "resource_objective", "resource_utility",
]
