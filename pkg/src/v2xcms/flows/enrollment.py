"""Enrollment flows.

* IEEE SCMS: EeEcaCertRequestSpdu / EcaEeCertResponseSpdu, request signed
  with the pre-loaded canonical key, response signed by the ECA.
* ETSI CCMS: EnrolmentRequest / EnrolmentResponse, both signed-and-encrypted;
  the request nests an enrolment-key proof of possession inside the
  canonical-key signature.
* C-SCMS: the IEEE request/response carried over a GBA channel.
"""

from __future__ import annotations

from typing import Optional

from ..certs import (
    ecqv_derive_private,
    ecqv_issue,
    ecqv_reconstruct_public,
    issue_explicit,
    validate_chain,
)
from ..codec import Reader, Writer, decode_certificate, encode_certificate, encode_signed_data, encode_signed_encrypted
from ..errors import (
    BadInnerPoP,
    BadRequestSignature,
    BadResponse,
    UnregisteredCanonicalKey,
)
from ..messages import encrypt_signed, encrypt_to_key, key_id8, sign_data, sign_with_key, verify_with_key
from ..model import PSID_CERT_MGMT, Certificate, CertKind, SignedData, SignerKind
from ..crypto import KeyPair
from ._common import (
    STATUS_OK,
    DirectLink,
    MsgType,
    check_signed_by,
    gba_link,
    open_encrypted,
    open_signed,
    optional_scalar,
    payload_reader,
    rejecting,
    request_hash,
)
from .actors import ENROLLMENT_LIFETIME, AuthorityState, EndEntityState, Role, uses_implicit_certs


# -- IEEE request / response (shared by SCMS and C-SCMS) -------------------------


def build_ee_eca_cert_request(ee: EndEntityState, now64: int) -> bytes:
    profile = ee.profile
    payload = (Writer().u8(MsgType.EE_ECA_CERT_REQUEST)
               .raw(profile.curve.compress(ee.enrollment_key.public_point))
               .lp(ee.name.encode("utf-8")).getvalue())
    msg = sign_with_key(profile, payload, PSID_CERT_MGMT, ee.canonical, now64, rng=ee.rng)
    return encode_signed_data(msg)


def eca_handle_cert_request(eca: AuthorityState, data: bytes) -> bytes:
    pki = eca.pki
    profile = eca.profile
    with eca.lock, rejecting(BadRequestSignature, "EeEcaCertRequestSpdu"):
        msg = open_signed(data)
        if msg.signer_kind is not SignerKind.DIGEST:
            raise BadRequestSignature("request must be signed by the canonical key")
        canonical = eca.canonical_registry.get(msg.signer)
        if canonical is None:
            raise UnregisteredCanonicalKey("canonical key is not registered at the ECA")
        if not verify_with_key(profile, msg, canonical):
            raise BadRequestSignature("canonical-key signature does not verify")
        r = payload_reader(msg, MsgType.EE_ECA_CERT_REQUEST)
        request_public = profile.curve.decompress(r.raw(33))
        name = r.lp().decode("utf-8")
        r.done()

        validity = (pki.now, ENROLLMENT_LIFETIME)
        contribution = None
        if uses_implicit_certs(profile):
            iss = ecqv_issue(profile, eca.certificate, eca.keypair, request_public, CertKind.ENROLLMENT,
                             name, validity, eca.rng)
            cert, contribution = iss.certificate, iss.private_key_contribution
        else:
            cert = issue_explicit(profile, eca.certificate, eca.keypair, request_public, CertKind.ENROLLMENT,
                                  name, validity, eca.rng)
        eca.record_issued(cert)

        w = Writer().u8(MsgType.ECA_EE_CERT_RESPONSE).raw(request_hash(profile, data))
        w.lp(encode_certificate(cert))
        if contribution is None:
            w.u8(0)
        else:
            w.u8(1).raw(contribution.to_bytes(32, "big"))
        resp = sign_data(profile, w.getvalue(), PSID_CERT_MGMT, eca.certificate, eca.keypair.private_scalar,
                         time=pki.now64, rng=eca.rng)
        return encode_signed_data(resp)


def _install_enrollment(ee: EndEntityState, cert: Certificate, contribution: Optional[int],
                        issuer_role: Role, now: int) -> None:
    profile = ee.profile
    curve = profile.curve
    issuer_cert = ee.authority_certs[issuer_role]
    report = validate_chain(profile, cert, [issuer_cert], ee.root, now)
    if not report.ok:
        raise BadResponse(f"issued enrollment certificate does not validate: {report}")
    if cert.kind is not CertKind.ENROLLMENT:
        raise BadResponse("issued certificate is not an enrollment certificate")
    if cert.is_explicit:
        if contribution is not None or cert.tbs.key_point != ee.enrollment_key.public_point:
            raise BadResponse("explicit certificate does not carry the requested key")
        key = ee.enrollment_key
    else:
        if contribution is None:
            raise BadResponse("implicit certificate without a private-key contribution")
        d = ecqv_derive_private(profile, cert, ee.enrollment_key.private_scalar, contribution)
        public = ecqv_reconstruct_public(profile, cert, issuer_cert.tbs.key_point)
        if curve.mul_base(d) != public:
            raise BadResponse("reconstructed enrollment key does not match")
        key = KeyPair(d, public)
    ee.enrollment_cert = cert
    ee.enrollment_key = key


def ee_handle_cert_response(ee: EndEntityState, data: bytes, request: bytes, now: int) -> Certificate:
    profile = ee.profile
    with rejecting(BadResponse, "EcaEeCertResponseSpdu"):
        msg = open_signed(data)
        check_signed_by(profile, msg, ee.authority_certs[Role.ECA], [ee.root], now, BadResponse)
        r = payload_reader(msg, MsgType.ECA_EE_CERT_RESPONSE)
        if r.raw(8) != request_hash(profile, request):
            raise BadResponse("response does not answer this request")
        cert = decode_certificate(r.lp())
        contribution = optional_scalar(r)
        r.done()
        _install_enrollment(ee, cert, contribution, Role.ECA, now)
    return cert


def _ieee_enroll(ee: EndEntityState, eca: AuthorityState, link) -> Certificate:
    pki = eca.pki
    request = build_ee_eca_cert_request(ee, pki.now64)
    got = link.up(eca.name, "EeEcaCertRequestSpdu", request)
    response = eca_handle_cert_request(eca, got)
    got = link.down(eca.name, "EcaEeCertResponseSpdu", response)
    return ee_handle_cert_response(ee, got, request, pki.now)


def scms_enroll(ee: EndEntityState, eca: AuthorityState) -> Certificate:
    """Request/response enrollment with the ECA; the certificate is implicit."""
    return _ieee_enroll(ee, eca, DirectLink(eca.pki.bus, ee.label))


def cscms_enroll(ee: EndEntityState, as_: AuthorityState, eca: AuthorityState) -> Certificate:
    """The SCMS exchange, framed inside the GBA channel to the AS."""
    return _ieee_enroll(ee, eca, gba_link(ee, as_))


# -- ETSI enrolment ------------------------------------------------------------------


def build_enrolment_request(its: EndEntityState, ea_cert: Certificate, now64: int,
                            pop: Optional[SignedData] = None) -> bytes:
    """Outer canonical-key signature over an inner enrolment-key proof of possession.

    ``pop`` replaces the inner proof (used to exercise the EA's checks).
    """
    profile = its.profile
    if pop is None:
        inner_payload = (Writer().u8(MsgType.ENROLMENT_POP)
                         .raw(profile.curve.compress(its.enrollment_key.public_point))
                         .lp(its.name.encode("utf-8")).getvalue())
        pop = sign_with_key(profile, inner_payload, PSID_CERT_MGMT, its.enrollment_key, now64, rng=its.rng)
    outer_payload = Writer().u8(MsgType.ENROLMENT_REQUEST).lp(encode_signed_data(pop)).getvalue()
    outer = sign_with_key(profile, outer_payload, PSID_CERT_MGMT, its.canonical, now64, rng=its.rng)
    return encode_signed_encrypted(encrypt_signed(profile, outer, ea_cert, its.rng))


def ea_handle_enrolment_request(ea: AuthorityState, data: bytes) -> bytes:
    pki = ea.pki
    profile = ea.profile
    with ea.lock, rejecting(BadRequestSignature, "EnrolmentRequest"):
        outer = open_encrypted(profile, data, ea.cert_id, ea.keypair)
        canonical = ea.canonical_registry.get(outer.signer) if outer.signer_kind is SignerKind.DIGEST else None
        if canonical is None:
            raise UnregisteredCanonicalKey("canonical key is not registered at the EA")
        if not verify_with_key(profile, outer, canonical):
            raise BadRequestSignature("canonical-key signature does not verify")
        r = payload_reader(outer, MsgType.ENROLMENT_REQUEST)
        pop_bytes = r.lp()
        r.done()
        with rejecting(BadInnerPoP, "enrolment proof of possession"):
            pop = open_signed(pop_bytes)
            pr = payload_reader(pop, MsgType.ENROLMENT_POP)
            public = profile.curve.decompress(pr.raw(33))
            name = pr.lp().decode("utf-8")
            pr.done()
            if not verify_with_key(profile, pop, public):
                raise BadInnerPoP("enrolment-key signature does not verify")

        cert = issue_explicit(profile, ea.certificate, ea.keypair, public, CertKind.ENROLLMENT, name,
                              (pki.now, ENROLLMENT_LIFETIME), ea.rng)
        ea.record_issued(cert)
        payload = (Writer().u8(MsgType.ENROLMENT_RESPONSE).raw(request_hash(profile, data)).u8(STATUS_OK)
                   .lp(encode_certificate(cert)).getvalue())
        resp = sign_data(profile, payload, PSID_CERT_MGMT, ea.certificate, ea.keypair.private_scalar,
                         time=pki.now64, rng=ea.rng)
        enc = encrypt_to_key(profile, resp, public, key_id8(profile, public), ea.rng)
        return encode_signed_encrypted(enc)


def its_handle_enrolment_response(its: EndEntityState, data: bytes, request: bytes, now: int) -> Certificate:
    profile = its.profile
    with rejecting(BadResponse, "EnrolmentResponse"):
        key = its.enrollment_key
        msg = open_encrypted(profile, data, key_id8(profile, key.public_point), key)
        check_signed_by(profile, msg, its.authority_certs[Role.EA], [its.root], now, BadResponse)
        r = payload_reader(msg, MsgType.ENROLMENT_RESPONSE)
        if r.raw(8) != request_hash(profile, request):
            raise BadResponse("response does not answer this request")
        if r.u8() != STATUS_OK:
            raise BadResponse("enrolment refused")
        cert = decode_certificate(r.lp())
        r.done()
        _install_enrollment(its, cert, None, Role.EA, now)
    return cert


def ccms_enrol(its: EndEntityState, ea: AuthorityState) -> Certificate:
    """Signed-and-encrypted enrolment with the EA; the certificate is explicit."""
    pki = ea.pki
    link = DirectLink(pki.bus, its.label)
    request = build_enrolment_request(its, ea.certificate, pki.now64)
    got = link.up(ea.name, "EnrolmentRequest", request)
    response = ea_handle_enrolment_request(ea, got)
    got = link.down(ea.name, "EnrolmentResponse", response)
    return its_handle_enrolment_response(its, got, request, pki.now)
