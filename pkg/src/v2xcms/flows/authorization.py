"""Authorization flows.

IEEE SCMS and C-SCMS share one message sequence (the latter tunnelled over
the GBA channel, with the PRA in the RA's place):

    EeRaCertRequestSpdu      EE -> RA   encrypted, signed with the enrollment cert
    RaEeCertAckSpdu          RA -> EE   signed by the RA over the request id
    RaAcaCertRequestSpdu     RA -> ACA  one per cocoon index, signed by the RA
    AcaRaCertResponseSpdu    ACA -> RA  certificate (+ ECQV contribution)
    EeRaDownloadRequestSpdu  EE -> RA   encrypted, names the batch
    RaEeDownloadBundle       RA -> EE   RaEeCertInfo + ACA responses, encrypted

ETSI CCMS uses AuthorizationRequest / AuthorizationValidationRequest /
AuthorizationValidationResponse / AuthorizationResponse with the EA vouching
for the enrolment certificate behind an encrypted EcSignature.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

from ..butterfly import (
    DEFAULT_BATCH_SIZE,
    MAX_BATCH_SIZE,
    expand_cocoon_private,
    expand_cocoon_public,
    new_caterpillar,
)
from ..certs import ecqv_derive_private, ecqv_issue, ecqv_reconstruct_public, issue_explicit, validate_chain
from ..codec import (
    Reader,
    Writer,
    decode_certificate,
    encode_certificate,
    encode_signed_data,
    encode_signed_encrypted,
    hashed_id8,
)
from ..crypto import generate_keypair
from ..errors import (
    BadPoP,
    BadRequestSignature,
    BadResponse,
    DownloadBeforeAck,
    EnrollmentChainInvalid,
    FlowError,
    OutOfRange,
    V2XError,
    ValidationRejected,
)
from ..messages import (
    VerifyFailure,
    encrypt_signed,
    encrypt_to_key,
    key_id8,
    sign_data,
    sign_with_key,
    verify_signed_data,
    verify_with_key,
)
from ..model import PSID_CERT_MGMT, Certificate, CertKind, SignedData, SignerKind
from ._common import (
    STATUS_OK,
    STATUS_REJECTED,
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
from .actors import AUTHORIZATION_LIFETIME, AuthorityState, EndEntityState, Role, uses_implicit_certs

Credential = Tuple[Certificate, int]


def _enrollment_issuer_public(ee: EndEntityState):
    cert = ee.enrollment_cert
    if cert is None:
        raise FlowError("device holds no enrollment certificate")
    if cert.is_explicit:
        return None
    return ee.authority_certs[Role.ECA].tbs.key_point


def _sign_as_enrolled(ee: EndEntityState, payload: bytes, now64: int,
                      mode: SignerKind = SignerKind.CERTIFICATE) -> SignedData:
    return sign_data(ee.profile, payload, PSID_CERT_MGMT, ee.enrollment_cert, ee.enrollment_key.private_scalar,
                     mode, now64, rng=ee.rng, issuer_public=_enrollment_issuer_public(ee))


def _authority_sign(auth: AuthorityState, payload: bytes) -> SignedData:
    return sign_data(auth.profile, payload, PSID_CERT_MGMT, auth.certificate, auth.keypair.private_scalar,
                     time=auth.pki.now64, rng=auth.rng)


# -- IEEE / C-SCMS: device side -----------------------------------------------------------


def build_ee_ra_cert_request(ee: EndEntityState, ra_cert: Certificate, batch_size: int, now64: int) -> bytes:
    if not 1 <= batch_size <= MAX_BATCH_SIZE:
        raise OutOfRange(f"batch size must lie in [1, {MAX_BATCH_SIZE}]")
    profile = ee.profile
    ee.caterpillar = new_caterpillar(profile, ee.rng)
    cat = ee.caterpillar
    payload = (Writer().u8(MsgType.EE_RA_CERT_REQUEST)
               .raw(profile.curve.compress(cat.keypair.public_point))
               .raw(cat.expansion_key)
               .u16(batch_size).getvalue())
    inner = _sign_as_enrolled(ee, payload, now64)
    return encode_signed_encrypted(encrypt_signed(profile, inner, ra_cert, ee.rng))


def ee_handle_ack(ee: EndEntityState, data: bytes, request: bytes, ra_role: Role, now: int) -> bytes:
    profile = ee.profile
    with rejecting(BadResponse, "RaEeCertAckSpdu"):
        msg = open_signed(data)
        check_signed_by(profile, msg, ee.authority_certs[ra_role], [ee.root], now, BadResponse)
        r = payload_reader(msg, MsgType.RA_EE_CERT_ACK)
        batch_id = r.raw(8)
        r.done()
        if batch_id != request_hash(profile, request):
            raise BadResponse("acknowledgement does not name this request")
    ee.pending_batch = batch_id
    return batch_id


def build_ee_ra_download_request(ee: EndEntityState, ra_cert: Certificate, now64: int) -> bytes:
    if ee.pending_batch is None:
        raise DownloadBeforeAck("no acknowledged batch to download")
    payload = Writer().u8(MsgType.EE_RA_DOWNLOAD_REQUEST).raw(ee.pending_batch).getvalue()
    inner = _sign_as_enrolled(ee, payload, now64)
    return encode_signed_encrypted(encrypt_signed(ee.profile, inner, ra_cert, ee.rng))


def _derive_credential(ee: EndEntityState, cert: Certificate, contribution: Optional[int], index: int,
                       now: int) -> Credential:
    profile = ee.profile
    curve = profile.curve
    cat = ee.caterpillar
    aca_cert = ee.authority_certs[Role.ACA]
    report = validate_chain(profile, cert, [aca_cert], ee.root, now)
    if not report.ok:
        raise BadResponse(f"authorization certificate {index} does not validate: {report}")
    if cert.kind is not CertKind.AUTHORIZATION:
        raise BadResponse(f"certificate {index} is not an authorization certificate")
    b = expand_cocoon_private(profile, cat.keypair.private_scalar, cat.expansion_key, index)
    if cert.is_explicit:
        if contribution is not None:
            raise BadResponse("explicit certificate with a private-key contribution")
        d, public = b, cert.tbs.key_point
    else:
        if contribution is None:
            raise BadResponse("implicit certificate without a private-key contribution")
        d = ecqv_derive_private(profile, cert, b, contribution)
        public = ecqv_reconstruct_public(profile, cert, aca_cert.tbs.key_point)
    if curve.mul_base(d) != public:
        raise BadResponse(f"butterfly key {index} does not match its certificate")
    return cert, d


def ee_handle_download_bundle(ee: EndEntityState, data: bytes, ra_role: Role, now: int) -> List[Credential]:
    profile = ee.profile
    with rejecting(BadResponse, "RaEeDownloadBundle"):
        msg = open_encrypted(profile, data, hashed_id8(profile, ee.enrollment_cert), ee.enrollment_key)
        check_signed_by(profile, msg, ee.authority_certs[ra_role], [ee.root], now, BadResponse)
        r = payload_reader(msg, MsgType.RA_EE_DOWNLOAD_BUNDLE)
        info = Reader(r.lp())
        batch_id = info.raw(8)
        size = info.u16()
        indices = [info.u32() for _ in range(size)]
        info.done()
        entries = r.seq()
        r.done()
        if batch_id != ee.pending_batch:
            raise BadResponse("bundle belongs to another batch")
        if len(entries) != size or len(set(indices)) != size:
            raise BadResponse("bundle does not match its RaEeCertInfo")
        creds = []
        for index, entry in zip(indices, entries):
            resp = open_signed(entry)
            check_signed_by(profile, resp, ee.authority_certs[Role.ACA], [ee.root], now, BadResponse)
            er = payload_reader(resp, MsgType.ACA_RA_CERT_RESPONSE)
            er.raw(8)  # the RA's request id, meaningful to the RA only
            cert = decode_certificate(er.lp())
            contribution = optional_scalar(er)
            er.done()
            creds.append(_derive_credential(ee, cert, contribution, index, now))
    ee.authorization_credentials = creds
    ee.pending_batch = None
    return creds


# -- IEEE / C-SCMS: RA and ACA ----------------------------------------------------------


def _open_enrolled_request(ra: AuthorityState, data: bytes, expected: MsgType):
    """Decrypt, then check the enrollment chain and signature of a device request."""
    profile = ra.profile
    pki = ra.pki
    msg = open_encrypted(profile, data, ra.cert_id, ra.keypair)
    if not isinstance(msg.signer, Certificate):
        raise BadRequestSignature("request must carry the enrollment certificate")
    enroller = pki.authorities[Role.ECA]
    outcome = verify_signed_data(profile, msg, None, [enroller.certificate, pki.root], pki.now)
    if outcome.reason is VerifyFailure.CHAIN_INVALID:
        raise EnrollmentChainInvalid(f"enrollment certificate rejected: {outcome.chain}")
    if not outcome.accepted:
        raise BadRequestSignature(f"request signature rejected: {outcome.reason.value}")
    if outcome.signer.kind is not CertKind.ENROLLMENT:
        raise EnrollmentChainInvalid("request not signed under an enrollment certificate")
    return msg, payload_reader(msg, expected)


def ra_handle_cert_request(ra: AuthorityState, data: bytes) -> Tuple[bytes, bytes]:
    """Returns (RaEeCertAckSpdu, batch id)."""
    profile = ra.profile
    with ra.lock, rejecting(BadRequestSignature, "EeRaCertRequestSpdu"):
        msg, r = _open_enrolled_request(ra, data, MsgType.EE_RA_CERT_REQUEST)
        caterpillar = profile.curve.decompress(r.raw(33))
        expansion_key = r.raw(16)
        size = r.u16()
        r.done()
        if not 1 <= size <= MAX_BATCH_SIZE:
            raise BadRequestSignature(f"batch size {size} outside [1, {MAX_BATCH_SIZE}]")
        batch_id = request_hash(profile, data)
        ra.batches[batch_id] = {
            "owner": hashed_id8(profile, msg.signer),
            "enrollment_cert": msg.signer,
            "caterpillar": caterpillar,
            "expansion_key": expansion_key,
            "size": size,
            "responses": None,
        }
        ack = _authority_sign(ra, Writer().u8(MsgType.RA_EE_CERT_ACK).raw(batch_id).getvalue())
        return encode_signed_data(ack), batch_id


def build_ra_aca_cert_request(ra: AuthorityState, cocoon_point) -> bytes:
    profile = ra.profile
    payload = Writer().u8(MsgType.RA_ACA_CERT_REQUEST).raw(profile.curve.compress(cocoon_point)).getvalue()
    return encode_signed_data(_authority_sign(ra, payload))


def aca_handle_cert_request(aca: AuthorityState, data: bytes, ra_role: Role) -> bytes:
    pki = aca.pki
    profile = aca.profile
    with aca.lock, rejecting(BadRequestSignature, "RaAcaCertRequestSpdu"):
        msg = open_signed(data)
        check_signed_by(profile, msg, pki.authorities[ra_role].certificate, [pki.root], pki.now,
                        BadRequestSignature)
        r = payload_reader(msg, MsgType.RA_ACA_CERT_REQUEST)
        cocoon = profile.curve.decompress(r.raw(33))
        r.done()
        # pseudonymous: the ACA learns nothing that names the device
        name = "pseudonym"
        validity = (pki.now, AUTHORIZATION_LIFETIME)
        contribution = None
        if uses_implicit_certs(profile):
            iss = ecqv_issue(profile, aca.certificate, aca.keypair, cocoon, CertKind.AUTHORIZATION, name,
                             validity, aca.rng)
            cert, contribution = iss.certificate, iss.private_key_contribution
        else:
            cert = issue_explicit(profile, aca.certificate, aca.keypair, cocoon, CertKind.AUTHORIZATION, name,
                                  validity, aca.rng)
        aca.record_issued(cert)
        w = Writer().u8(MsgType.ACA_RA_CERT_RESPONSE).raw(request_hash(profile, data)).lp(encode_certificate(cert))
        if contribution is None:
            w.u8(0)
        else:
            w.u8(1).raw(contribution.to_bytes(32, "big"))
        return encode_signed_data(_authority_sign(aca, w.getvalue()))


def ra_check_aca_response(ra: AuthorityState, data: bytes, request: bytes) -> bytes:
    pki = ra.pki
    profile = ra.profile
    with rejecting(BadResponse, "AcaRaCertResponseSpdu"):
        msg = open_signed(data)
        check_signed_by(profile, msg, pki.authorities[Role.ACA].certificate, [pki.root], pki.now, BadResponse)
        r = payload_reader(msg, MsgType.ACA_RA_CERT_RESPONSE)
        if r.raw(8) != request_hash(profile, request):
            raise BadResponse("ACA response does not answer this request")
    return data


def ra_provision_batch(ra: AuthorityState, aca: AuthorityState, batch_id: bytes) -> None:
    """Expand cocoon keys and obtain one certificate per index from the ACA."""
    profile = ra.profile
    bus = ra.pki.bus
    with ra.lock:
        batch = ra.batches[batch_id]
    responses = []
    for index in range(batch["size"]):
        cocoon = expand_cocoon_public(profile, batch["caterpillar"], batch["expansion_key"], index)
        request = build_ra_aca_cert_request(ra, cocoon.point)
        got = bus.deliver(ra.name, aca.name, "RaAcaCertRequestSpdu", request)
        response = aca_handle_cert_request(aca, got, ra.role)
        got = bus.deliver(aca.name, ra.name, "AcaRaCertResponseSpdu", response, "response")
        responses.append((index, ra_check_aca_response(ra, got, request)))
    with ra.lock:
        batch["responses"] = responses


def ra_handle_download_request(ra: AuthorityState, data: bytes) -> bytes:
    pki = ra.pki
    profile = ra.profile
    with ra.lock, rejecting(BadRequestSignature, "EeRaDownloadRequestSpdu"):
        msg, r = _open_enrolled_request(ra, data, MsgType.EE_RA_DOWNLOAD_REQUEST)
        batch_id = r.raw(8)
        r.done()
        batch = ra.batches.get(batch_id)
        if batch is None or batch["responses"] is None:
            raise DownloadBeforeAck("batch is unknown or not yet provisioned")
        if batch["owner"] != hashed_id8(profile, msg.signer):
            raise BadRequestSignature("batch belongs to another device")
        indices = [i for i, _ in batch["responses"]]
        info = Writer().raw(batch_id).u16(len(indices))
        for i in indices:
            info.u32(i)
        payload = (Writer().u8(MsgType.RA_EE_DOWNLOAD_BUNDLE).lp(info.getvalue())
                   .seq([resp for _, resp in batch["responses"]]).getvalue())
        bundle = _authority_sign(ra, payload)
        owner_cert = batch["enrollment_cert"]
        issuer_public = None if owner_cert.is_explicit else pki.authorities[Role.ECA].certificate.tbs.key_point
        del ra.batches[batch_id]
        return encode_signed_encrypted(encrypt_signed(profile, bundle, owner_cert, ra.rng, issuer_public))


def _ieee_authorize(ee: EndEntityState, ra: AuthorityState, aca: AuthorityState, link,
                    batch_size: int) -> List[Credential]:
    pki = ra.pki
    ra_cert = ee.authority_certs[ra.role]
    request = build_ee_ra_cert_request(ee, ra_cert, batch_size, pki.now64)
    got = link.up(ra.name, "EeRaCertRequestSpdu", request)
    ack, batch_id = ra_handle_cert_request(ra, got)
    got = link.down(ra.name, "RaEeCertAckSpdu", ack)
    ee_handle_ack(ee, got, request, ra.role, pki.now)

    ra_provision_batch(ra, aca, batch_id)

    download = build_ee_ra_download_request(ee, ra_cert, pki.now64)
    got = link.up(ra.name, "EeRaDownloadRequestSpdu", download)
    bundle = ra_handle_download_request(ra, got)
    got = link.down(ra.name, "RaEeDownloadBundle", bundle)
    return ee_handle_download_bundle(ee, got, ra.role, pki.now)


def scms_authorize(ee: EndEntityState, ra: AuthorityState, aca: AuthorityState,
                   batch_size: int = DEFAULT_BATCH_SIZE) -> List[Credential]:
    """Butterfly batch of implicit authorization certificates."""
    return _ieee_authorize(ee, ra, aca, DirectLink(ra.pki.bus, ee.label), batch_size)


def cscms_authorize(ee: EndEntityState, as_: AuthorityState, pra: AuthorityState, aca: AuthorityState,
                    batch_size: int = DEFAULT_BATCH_SIZE) -> List[Credential]:
    """Same sequence through the GBA channel; certificates are explicit over cocoon keys."""
    return _ieee_authorize(ee, pra, aca, gba_link(ee, as_), batch_size)


# -- ETSI CCMS ---------------------------------------------------------------------------


def build_ec_signature(its: EndEntityState, auth_public, now64: int) -> SignedData:
    """Enrolment-key signature over the authorization key, naming the enrolment cert by digest."""
    payload = Writer().u8(MsgType.EC_SIGNATURE).raw(its.profile.curve.compress(auth_public)).getvalue()
    return _sign_as_enrolled(its, payload, now64, SignerKind.DIGEST)


def build_authorization_request(its: EndEntityState, aa_cert: Certificate, ea_cert: Certificate, now64: int,
                                ec_signature: Optional[SignedData] = None, pop_key=None) -> Tuple[bytes, object]:
    """Returns (AuthorizationRequest, fresh authorization key pair).

    ``ec_signature`` and ``pop_key`` substitute the EcSignature or the key
    that signs the outer request (used to exercise the checks).
    """
    profile = its.profile
    auth_key = generate_keypair(profile, its.rng)
    if ec_signature is None:
        ec_signature = build_ec_signature(its, auth_key.public_point, now64)
    sealed_ec = encode_signed_encrypted(encrypt_signed(profile, ec_signature, ea_cert, its.rng))
    payload = (Writer().u8(MsgType.AUTHORIZATION_REQUEST)
               .raw(profile.curve.compress(auth_key.public_point))
               .lp(sealed_ec).getvalue())
    inner = sign_with_key(profile, payload, PSID_CERT_MGMT, pop_key or auth_key, now64, rng=its.rng)
    return encode_signed_encrypted(encrypt_signed(profile, inner, aa_cert, its.rng)), auth_key


def aa_handle_authorization_request(aa: AuthorityState, data: bytes):
    """PoP check only; the enrolment certificate stays opaque to the AA.

    Returns (auth public key, sealed EcSignature).
    """
    profile = aa.profile
    with aa.lock, rejecting(BadPoP, "AuthorizationRequest"):
        msg = open_encrypted(profile, data, aa.cert_id, aa.keypair)
        r = payload_reader(msg, MsgType.AUTHORIZATION_REQUEST)
        auth_public = profile.curve.decompress(r.raw(33))
        sealed_ec = r.lp()
        r.done()
        if not verify_with_key(profile, msg, auth_public):
            raise BadPoP("request is not signed by the authorization key it carries")
        return auth_public, sealed_ec


def build_validation_request(aa: AuthorityState, ea_cert: Certificate, auth_public, sealed_ec: bytes) -> bytes:
    profile = aa.profile
    payload = (Writer().u8(MsgType.AUTHORIZATION_VALIDATION_REQUEST)
               .raw(profile.curve.compress(auth_public)).lp(sealed_ec).getvalue())
    return encode_signed_encrypted(encrypt_signed(profile, _authority_sign(aa, payload), ea_cert, aa.rng))


def _ec_signature_ok(ea: AuthorityState, sealed_ec: bytes, auth_public) -> bool:
    profile = ea.profile
    pki = ea.pki
    try:
        ec = open_encrypted(profile, sealed_ec, ea.cert_id, ea.keypair)
        r = payload_reader(ec, MsgType.EC_SIGNATURE)
        named = profile.curve.decompress(r.raw(33))
        r.done()
    except (V2XError, ValueError):
        return False
    if named != auth_public:
        return False
    outcome = verify_signed_data(profile, ec, ea.issued.get, [ea.certificate, pki.root], pki.now)
    return outcome.accepted and outcome.signer.kind is CertKind.ENROLLMENT


def ea_handle_validation_request(ea: AuthorityState, data: bytes) -> bytes:
    pki = ea.pki
    profile = ea.profile
    with ea.lock, rejecting(BadRequestSignature, "AuthorizationValidationRequest"):
        msg = open_encrypted(profile, data, ea.cert_id, ea.keypair)
        check_signed_by(profile, msg, pki.authorities[Role.AA].certificate, [pki.root], pki.now,
                        BadRequestSignature)
        r = payload_reader(msg, MsgType.AUTHORIZATION_VALIDATION_REQUEST)
        auth_public = profile.curve.decompress(r.raw(33))
        sealed_ec = r.lp()
        r.done()
        status = STATUS_OK if _ec_signature_ok(ea, sealed_ec, auth_public) else STATUS_REJECTED
        payload = (Writer().u8(MsgType.AUTHORIZATION_VALIDATION_RESPONSE).raw(request_hash(profile, data))
                   .u8(status).getvalue())
        aa_cert = pki.authorities[Role.AA].certificate
        return encode_signed_encrypted(encrypt_signed(profile, _authority_sign(ea, payload), aa_cert, ea.rng))


def aa_handle_validation_response(aa: AuthorityState, data: bytes, request: bytes) -> bool:
    pki = aa.pki
    profile = aa.profile
    with rejecting(BadResponse, "AuthorizationValidationResponse"):
        msg = open_encrypted(profile, data, aa.cert_id, aa.keypair)
        check_signed_by(profile, msg, pki.authorities[Role.EA].certificate, [pki.root], pki.now, BadResponse)
        r = payload_reader(msg, MsgType.AUTHORIZATION_VALIDATION_RESPONSE)
        if r.raw(8) != request_hash(profile, request):
            raise BadResponse("validation response does not answer this request")
        status = r.u8()
        r.done()
    return status == STATUS_OK


def build_authorization_response(aa: AuthorityState, request: bytes, auth_public, approved: bool) -> bytes:
    pki = aa.pki
    profile = aa.profile
    w = Writer().u8(MsgType.AUTHORIZATION_RESPONSE).raw(request_hash(profile, request))
    if approved:
        with aa.lock:
            ticket = issue_explicit(profile, aa.certificate, aa.keypair, auth_public, CertKind.AUTHORIZATION,
                                    "ticket", (pki.now, AUTHORIZATION_LIFETIME), aa.rng)
            aa.record_issued(ticket)
        w.u8(STATUS_OK).lp(encode_certificate(ticket))
    else:
        w.u8(STATUS_REJECTED).lp(b"")
    resp = _authority_sign(aa, w.getvalue())
    return encode_signed_encrypted(encrypt_to_key(profile, resp, auth_public, key_id8(profile, auth_public), aa.rng))


def its_handle_authorization_response(its: EndEntityState, data: bytes, request: bytes, auth_key,
                                      now: int) -> Credential:
    profile = its.profile
    with rejecting(BadResponse, "AuthorizationResponse"):
        msg = open_encrypted(profile, data, key_id8(profile, auth_key.public_point), auth_key)
        check_signed_by(profile, msg, its.authority_certs[Role.AA], [its.root], now, BadResponse)
        r = payload_reader(msg, MsgType.AUTHORIZATION_RESPONSE)
        if r.raw(8) != request_hash(profile, request):
            raise BadResponse("response does not answer this request")
        status = r.u8()
        body = r.lp()
        r.done()
        if status != STATUS_OK:
            raise ValidationRejected("the EA did not vouch for this enrolment")
        ticket = decode_certificate(body)
        report = validate_chain(profile, ticket, [its.authority_certs[Role.AA]], its.root, now)
        if not report.ok:
            raise BadResponse(f"authorization ticket does not validate: {report}")
        if not ticket.is_explicit or ticket.tbs.key_point != auth_key.public_point:
            raise BadResponse("ticket does not carry the requested key")
        if ticket.kind is not CertKind.AUTHORIZATION:
            raise BadResponse("ticket is not an authorization certificate")
    cred = (ticket, auth_key.private_scalar)
    its.authorization_credentials = [cred]
    return cred


def ccms_authorize(its: EndEntityState, aa: AuthorityState, ea: AuthorityState,
                   ec_signature: Optional[SignedData] = None) -> Credential:
    """Single authorization ticket; the EA validates on the AA's behalf."""
    pki = aa.pki
    bus = pki.bus
    link = DirectLink(bus, its.label)
    if its.enrollment_cert is None:
        raise FlowError("device holds no enrolment certificate")
    request, auth_key = build_authorization_request(its, its.authority_certs[Role.AA],
                                                    its.authority_certs[Role.EA], pki.now64, ec_signature)
    got = link.up(aa.name, "AuthorizationRequest", request)
    auth_public, sealed_ec = aa_handle_authorization_request(aa, got)

    validation = build_validation_request(aa, ea.certificate, auth_public, sealed_ec)
    got = bus.deliver(aa.name, ea.name, "AuthorizationValidationRequest", validation)
    verdict = ea_handle_validation_request(ea, got)
    got = bus.deliver(ea.name, aa.name, "AuthorizationValidationResponse", verdict, "response")
    approved = aa_handle_validation_response(aa, got, validation)

    response = build_authorization_response(aa, request, auth_public, approved)
    got = link.down(aa.name, "AuthorizationResponse", response)
    return its_handle_authorization_response(its, got, request, auth_key, pki.now)
