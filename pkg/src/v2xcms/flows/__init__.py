"""Role actors and the enrollment / authorization protocols, run in-process over a message bus."""

from .actors import (
    AUTHORIZATION_LIFETIME,
    ENROLLMENT_LIFETIME,
    FIXED_TIME32,
    PROFILE_ROLES,
    AuthorityState,
    EndEntityState,
    Pki,
    Role,
    bootstrap_end_entity,
    create_pki,
    uses_implicit_certs,
)
from .authorization import ccms_authorize, cscms_authorize, scms_authorize
from .bus import MessageBus, TranscriptEntry, flip_bit
from .enrollment import ccms_enrol, cscms_enroll, scms_enroll
from .gba import SecureChannel, establish_gba_channel
from .runner import Lifecycle, authorization_role, authorize, enroll, run_lifecycle, sign_bsm

__all__ = [
    "AUTHORIZATION_LIFETIME", "ENROLLMENT_LIFETIME", "FIXED_TIME32", "PROFILE_ROLES",
    "AuthorityState", "EndEntityState", "Pki", "Role", "bootstrap_end_entity", "create_pki",
    "uses_implicit_certs", "ccms_authorize", "cscms_authorize", "scms_authorize",
    "MessageBus", "TranscriptEntry", "flip_bit", "ccms_enrol", "cscms_enroll", "scms_enroll",
    "SecureChannel", "establish_gba_channel", "enroll", "authorize", "run_lifecycle",
    "Lifecycle", "authorization_role", "sign_bsm",
]
