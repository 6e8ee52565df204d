"""Profile-independent entry points: pick the right flow for the PKI's system."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from ..butterfly import DEFAULT_BATCH_SIZE
from ..crypto import CCMS, SCMS, CryptoProfile
from ..messages import sign_data
from ..model import PSID_BSM, Certificate, SignedData
from .actors import EndEntityState, Pki, Role, bootstrap_end_entity, create_pki
from .authorization import ccms_authorize, cscms_authorize, scms_authorize
from .enrollment import ccms_enrol, cscms_enroll, scms_enroll
from .gba import establish_gba_channel


def enroll(pki: Pki, ee: EndEntityState) -> Certificate:
    name = pki.profile.name
    a = pki.authorities
    if name is SCMS.name:
        return scms_enroll(ee, a[Role.ECA])
    if name is CCMS.name:
        return ccms_enrol(ee, a[Role.EA])
    if ee.channel is None:
        establish_gba_channel(ee, a[Role.GBA_AS])
    return cscms_enroll(ee, a[Role.GBA_AS], a[Role.ECA])


def authorize(pki: Pki, ee: EndEntityState, batch_size: int = DEFAULT_BATCH_SIZE) -> List[Tuple[Certificate, int]]:
    """Returns the device's authorization credentials (one ticket under CCMS)."""
    name = pki.profile.name
    a = pki.authorities
    if name is SCMS.name:
        return scms_authorize(ee, a[Role.RA], a[Role.ACA], batch_size)
    if name is CCMS.name:
        return [ccms_authorize(ee, a[Role.AA], a[Role.EA])]
    if ee.channel is None:
        establish_gba_channel(ee, a[Role.GBA_AS])
    return cscms_authorize(ee, a[Role.GBA_AS], a[Role.PRA], a[Role.ACA], batch_size)


def authorization_role(profile: CryptoProfile) -> Role:
    """Issuer of the end-entity's message-signing credentials."""
    return Role.AA if profile.name is CCMS.name else Role.ACA


def sign_bsm(pki: Pki, ee: EndEntityState, payload: bytes, index: int = 0, **kwargs) -> SignedData:
    cert, d = ee.authorization_credentials[index]
    issuer = ee.authority_certs[authorization_role(ee.profile)]
    issuer_public = None if cert.is_explicit else issuer.tbs.key_point
    kwargs.setdefault("time", pki.now64)
    return sign_data(ee.profile, payload, PSID_BSM, cert, d, issuer_public=issuer_public, rng=ee.rng, **kwargs)


@dataclass
class Lifecycle:
    pki: Pki
    ee: EndEntityState
    message: SignedData


def run_lifecycle(profile: CryptoProfile, rng=None, name: str = "device-1", batch_size: int = DEFAULT_BATCH_SIZE,
                  payload: Optional[bytes] = None, bus=None) -> Lifecycle:
    """bootstrap -> enroll -> authorize -> sign one BSM."""
    pki = create_pki(profile, rng, bus=bus)
    ee = bootstrap_end_entity(pki, name)
    enroll(pki, ee)
    authorize(pki, ee, batch_size)
    msg = sign_bsm(pki, ee, payload if payload is not None else bytes(200))
    return Lifecycle(pki, ee, msg)


__all__ = ["enroll", "authorize", "authorization_role", "sign_bsm", "run_lifecycle", "Lifecycle"]
