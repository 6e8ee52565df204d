import re
import threading

import pytest

from conftest import ALL_PROFILES, FIXTURE_DIR
from v2xcms.certs import public_key_of, validate_chain
from v2xcms.codec import Writer, decode_signed_data, decode_signed_encrypted, encode_signed_data
from v2xcms.crypto import CCMS, CSCMS, SCMS, generate_keypair
from v2xcms.errors import (
    BadAuthResponse,
    BadInnerPoP,
    BadPoP,
    ChannelAuthFailure,
    DownloadBeforeAck,
    EnrollmentChainInvalid,
    UnknownSubscriber,
    UnregisteredCanonicalKey,
    V2XError,
    ValidationRejected,
)
from v2xcms.fixtures import FIXTURE_SEED, TRANSCRIPT_BATCH
from v2xcms.flows import (
    Role,
    authorization_role,
    authorize,
    bootstrap_end_entity,
    create_pki,
    enroll,
    establish_gba_channel,
    run_lifecycle,
    sign_bsm,
)
from v2xcms.flows.authorization import (
    aa_handle_authorization_request,
    build_authorization_request,
    build_ec_signature,
    build_ee_ra_download_request,
    ccms_authorize,
    cscms_authorize,
    scms_authorize,
)
from v2xcms.flows._common import MsgType
from v2xcms.flows.bus import MessageBus, flip_bit
from v2xcms.flows.enrollment import (
    build_enrolment_request,
    ccms_enrol,
    cscms_enroll,
    ea_handle_enrolment_request,
    scms_enroll,
)
from v2xcms.messages import KeyPath, sign_with_key, verify_signed_data
from v2xcms.model import PSID_CERT_MGMT, CertKind, CertType
from v2xcms.rng import SeededRng

EXPECTED_NAMES = {
    SCMS.name: ["EeEcaCertRequestSpdu", "EcaEeCertResponseSpdu", "EeRaCertRequestSpdu", "RaEeCertAckSpdu",
                "RaAcaCertRequestSpdu", "AcaRaCertResponseSpdu", "RaAcaCertRequestSpdu", "AcaRaCertResponseSpdu",
                "EeRaDownloadRequestSpdu", "RaEeDownloadBundle"],
    CCMS.name: ["EnrolmentRequest", "EnrolmentResponse", "AuthorizationRequest", "AuthorizationValidationRequest",
                "AuthorizationValidationResponse", "AuthorizationResponse"],
}


def _pki(profile, label, bus=None):
    return create_pki(profile, SeededRng(f"flows/{label}/{profile.name.value}"), bus=bus)


def _enrolled(profile, label, bus=None):
    pki = _pki(profile, label, bus)
    ee = bootstrap_end_entity(pki, "device-1")
    enroll(pki, ee)
    return pki, ee


def _transcript(profile, batch=TRANSCRIPT_BATCH, bus=None, seed="tamper"):
    bus = bus if bus is not None else MessageBus()
    run_lifecycle(profile, SeededRng(seed), batch_size=batch, bus=bus)
    return bus


class TestLifecycle:
    def test_end_to_end(self, profile):
        lc = run_lifecycle(profile, SeededRng(f"e2e/{profile.name.value}"), batch_size=4,
                           payload=b"\x5a" * 200)
        pki, ee = lc.pki, lc.ee
        # the verifier only sees the message plus public certificates
        chain = [pki.authorities[authorization_role(profile)].certificate, pki.root]
        out = verify_signed_data(profile, decode_signed_data(encode_signed_data(lc.message)), None, chain,
                                 pki.now)
        assert out.accepted
        assert out.path is (KeyPath.RECONSTRUCTED if profile is SCMS else KeyPath.CONTAINED)

    def test_every_credential_signs(self, lifecycles, profile):
        lc = lifecycles[profile.name]
        chain = [lc.pki.authorities[authorization_role(profile)].certificate, lc.pki.root]
        for i in range(len(lc.ee.authorization_credentials)):
            msg = sign_bsm(lc.pki, lc.ee, b"bsm %d" % i, index=i)
            assert verify_signed_data(profile, msg, None, chain, lc.pki.now).accepted

    @pytest.mark.parametrize("profile_", [SCMS, CCMS], ids=["SCMS", "CCMS"])
    def test_message_sequence(self, profile_):
        bus = _transcript(profile_)
        assert [e.name for e in bus.transcript] == EXPECTED_NAMES[profile_.name]

    def test_cscms_mirrors_scms_behind_the_channel(self):
        scms = _transcript(SCMS).transcript
        cscms = _transcript(CSCMS).transcript
        assert [e.name for e in cscms[:3]] == ["AuthenticationRequest", "AuthenticationChallenge",
                                               "AuthenticationResponse"]
        rename = {"GBA-AS": "EE", "PRA": "RA"}
        inner = [(e.direction, rename.get(e.src, e.src), rename.get(e.dst, e.dst), e.name)
                 for e in cscms if "EE" not in (e.src, e.dst)]
        assert inner == [(e.direction, e.src, e.dst, e.name) for e in scms]
        # the relayed certificate request carries the same message type byte
        assert decode_signed_data(cscms[4].data).payload[0] == decode_signed_data(scms[0].data).payload[0]

    def test_batch_sizes(self):
        pki, ee = _enrolled(SCMS, "batch")
        assert len(authorize(pki, ee, 20)) == 20
        with pytest.raises(V2XError):
            authorize(pki, ee, 0)
        with pytest.raises(V2XError):
            authorize(pki, ee, 101)

    def test_issued_log_records_everything(self, lifecycles):
        lc = lifecycles[SCMS.name]
        aca = lc.pki.authorities[Role.ACA]
        assert len(aca.issued_log) == len(set(aca.issued_log)) == 3
        eca = lc.pki.authorities[Role.ECA]
        assert len(eca.issued_log) == 1


class TestCertTypeMatrix:
    def test_scms_implicit(self):
        pki, ee = _enrolled(SCMS, "matrix")
        creds = scms_authorize(ee, pki.authorities[Role.RA], pki.authorities[Role.ACA], 20)
        assert len(creds) == 20
        assert ee.enrollment_cert.cert_type is CertType.IMPLICIT
        aca = pki.authorities[Role.ACA]
        for cert, d in creds:
            assert cert.cert_type is CertType.IMPLICIT and cert.kind is CertKind.AUTHORIZATION
            assert pki.profile.curve.mul_base(d) == public_key_of(SCMS, cert, aca.keypair.public_point)

    def test_ccms_explicit(self):
        pki, ee = _enrolled(CCMS, "matrix")
        assert ee.enrollment_cert.cert_type is CertType.EXPLICIT
        ticket, d = ccms_authorize(ee, pki.authorities[Role.AA], pki.authorities[Role.EA])
        assert ticket.cert_type is CertType.EXPLICIT and ticket.kind is CertKind.AUTHORIZATION
        assert validate_chain(CCMS, ticket, [pki.authorities[Role.AA].certificate], pki.root, pki.now).ok
        assert CCMS.curve.mul_base(d) == ticket.tbs.key_point

    def test_cscms_explicit(self):
        pki, ee = _enrolled(CSCMS, "matrix")
        assert ee.enrollment_cert.cert_type is CertType.EXPLICIT
        creds = cscms_authorize(ee, pki.authorities[Role.GBA_AS], pki.authorities[Role.PRA],
                                pki.authorities[Role.ACA], 5)
        for cert, d in creds:
            assert cert.cert_type is CertType.EXPLICIT and cert.kind is CertKind.AUTHORIZATION
            assert CSCMS.curve.mul_base(d) == cert.tbs.key_point


class TestEnrollmentErrors:
    def test_scms_registered(self):
        pki = _pki(SCMS, "enr")
        ee = bootstrap_end_entity(pki, "dev")
        cert = scms_enroll(ee, pki.authorities[Role.ECA])
        assert validate_chain(SCMS, cert, [pki.authorities[Role.ECA].certificate], pki.root, pki.now).ok
        assert cert.kind is CertKind.ENROLLMENT

    @pytest.mark.parametrize("prof", ALL_PROFILES, ids=lambda p: p.name.value)
    def test_unregistered_canonical_key(self, prof):
        pki = _pki(prof, "unreg")
        ee = bootstrap_end_entity(pki, "dev")
        ee.canonical = generate_keypair(prof, SeededRng("rogue"))
        with pytest.raises(UnregisteredCanonicalKey):
            enroll(pki, ee)

    def test_bad_inner_pop(self):
        pki = _pki(CCMS, "pop")
        its = bootstrap_end_entity(pki, "its")
        ea = pki.authorities[Role.EA]
        rogue = generate_keypair(CCMS, SeededRng("rogue"))
        # PoP names the real enrolment key but is signed by another key
        payload = (Writer().u8(MsgType.ENROLMENT_POP).raw(CCMS.curve.compress(its.enrollment_key.public_point))
                   .lp(b"its").getvalue())
        pop = sign_with_key(CCMS, payload, PSID_CERT_MGMT, rogue, pki.now64, rng=its.rng)
        with pytest.raises(BadInnerPoP):
            ea_handle_enrolment_request(ea, build_enrolment_request(its, ea.certificate, pki.now64, pop))

    def test_ccms_happy_path_explicit(self):
        pki = _pki(CCMS, "enrol")
        its = bootstrap_end_entity(pki, "its")
        cert = ccms_enrol(its, pki.authorities[Role.EA])
        assert cert.is_explicit and cert.tbs.key_point == its.enrollment_key.public_point

    def test_cscms_happy_path(self):
        pki = _pki(CSCMS, "enrol")
        ee = bootstrap_end_entity(pki, "dev")
        establish_gba_channel(ee, pki.authorities[Role.GBA_AS])
        cert = cscms_enroll(ee, pki.authorities[Role.GBA_AS], pki.authorities[Role.ECA])
        assert validate_chain(CSCMS, cert, [pki.authorities[Role.ECA].certificate], pki.root, pki.now).ok

    def test_cscms_tampered_frame(self):
        bus = MessageBus()
        pki = _pki(CSCMS, "frame", bus)
        ee = bootstrap_end_entity(pki, "dev")
        establish_gba_channel(ee, pki.authorities[Role.GBA_AS])
        bus.tamper = flip_bit(bus.mark(), 20)
        with pytest.raises(ChannelAuthFailure):
            cscms_enroll(ee, pki.authorities[Role.GBA_AS], pki.authorities[Role.ECA])

    def test_cscms_needs_channel(self):
        pki = _pki(CSCMS, "nochan")
        ee = bootstrap_end_entity(pki, "dev")
        with pytest.raises(ChannelAuthFailure):
            cscms_enroll(ee, pki.authorities[Role.GBA_AS], pki.authorities[Role.ECA])


class TestGba:
    def test_channel_round_trip_and_directions(self):
        pki = _pki(CSCMS, "gba")
        ee = bootstrap_end_entity(pki, "dev")
        as_ = pki.authorities[Role.GBA_AS]
        ee_side = establish_gba_channel(ee, as_)
        as_side = as_.channels["dev"]
        for i in range(3):
            assert as_side.open(ee_side.seal(b"up %d" % i)) == b"up %d" % i
            assert ee_side.open(as_side.seal(b"down %d" % i)) == b"down %d" % i
        with pytest.raises(ChannelAuthFailure):
            ee_side.open(ee_side.seal(b"reflected"))

    def test_replay_and_tamper(self):
        pki = _pki(CSCMS, "gba2")
        ee = bootstrap_end_entity(pki, "dev")
        as_ = pki.authorities[Role.GBA_AS]
        ee_side = establish_gba_channel(ee, as_)
        frame = ee_side.seal(b"hello")
        as_.channels["dev"].open(frame)
        with pytest.raises(ChannelAuthFailure):
            as_.channels["dev"].open(frame)
        bad = bytearray(ee_side.seal(b"hello"))
        bad[-1] ^= 1
        with pytest.raises(ChannelAuthFailure):
            as_.channels["dev"].open(bytes(bad))

    def test_wrong_secret(self):
        pki = _pki(CSCMS, "gba3")
        ee = bootstrap_end_entity(pki, "dev")
        ee.gba_secret = bytes(16)
        with pytest.raises(BadAuthResponse):
            establish_gba_channel(ee, pki.authorities[Role.GBA_AS])

    def test_unknown_subscriber(self):
        pki = _pki(CSCMS, "gba4")
        ee = bootstrap_end_entity(pki, "dev")
        ee.name = "stranger"
        with pytest.raises(UnknownSubscriber):
            establish_gba_channel(ee, pki.authorities[Role.GBA_AS])

    def test_counter_reuse_in_authorization(self):
        pki, ee = _enrolled(CSCMS, "replay")
        ee.channel.send_counter = 0  # the device reuses counters already seen by the AS
        with pytest.raises(ChannelAuthFailure):
            cscms_authorize(ee, pki.authorities[Role.GBA_AS], pki.authorities[Role.PRA],
                            pki.authorities[Role.ACA], 2)


class TestAuthorizationErrors:
    def test_download_before_ack(self):
        pki, ee = _enrolled(SCMS, "dl")
        with pytest.raises(DownloadBeforeAck):
            build_ee_ra_download_request(ee, pki.authorities[Role.RA].certificate, pki.now64)

    @pytest.mark.parametrize("prof", [SCMS, CSCMS], ids=["SCMS", "CSCMS"])
    def test_expired_enrollment(self, prof):
        pki, ee = _enrolled(prof, "expired")
        pki.now = ee.enrollment_cert.tbs.validity_end + 1
        with pytest.raises(EnrollmentChainInvalid):
            authorize(pki, ee, 2)

    def test_ccms_rejected_ec_signature(self):
        pki, its = _enrolled(CCMS, "ecsig")
        # EcSignature over some other key than the one in the request
        wrong = build_ec_signature(its, generate_keypair(CCMS, SeededRng("other")).public_point, pki.now64)
        with pytest.raises(ValidationRejected):
            ccms_authorize(its, pki.authorities[Role.AA], pki.authorities[Role.EA], wrong)
        assert its.authorization_credentials == []

    def test_ccms_unenrolled_ec_signature(self):
        pki, its = _enrolled(CCMS, "ecsig2")
        _, foreign = _enrolled(CCMS, "elsewhere")
        stranger = bootstrap_end_entity(pki, "stranger")
        # a genuine enrolment, but from an EA this PKI never heard of
        stranger.enrollment_cert, stranger.enrollment_key = foreign.enrollment_cert, foreign.enrollment_key
        with pytest.raises(ValidationRejected):
            ccms_authorize(stranger, pki.authorities[Role.AA], pki.authorities[Role.EA])

    def test_ccms_bad_pop(self):
        pki, its = _enrolled(CCMS, "pop")
        aa = pki.authorities[Role.AA]
        request, _ = build_authorization_request(its, aa.certificate, pki.authorities[Role.EA].certificate,
                                                 pki.now64, pop_key=generate_keypair(CCMS, SeededRng("x")))
        with pytest.raises(BadPoP):
            aa_handle_authorization_request(aa, request)


@pytest.mark.parametrize("prof", ALL_PROFILES, ids=lambda p: p.name.value)
def test_tampering_any_message_is_rejected(prof):
    reference = _transcript(prof).transcript
    assert reference
    for i, entry in enumerate(reference):
        for offset in (0, len(entry.data) // 2, len(entry.data) - 1):
            bus = MessageBus(flip_bit(i, offset, 3))
            with pytest.raises(V2XError):
                _transcript(prof, bus=bus)
            lag = len(bus.transcript) - 1 - i
            # the GBA-AS relays responses without reading them, and the
            # device cannot check a challenge; the next hop catches those
            relayed = entry.dst == "GBA-AS" and entry.direction == "response"
            assert lag == (1 if relayed or entry.name == "AuthenticationChallenge" else 0), (i, entry.name)


@pytest.mark.parametrize("prof", [SCMS, CSCMS], ids=["SCMS", "CSCMS"])
def test_privacy_boundary(prof):
    bus = MessageBus()
    lc = run_lifecycle(prof, SeededRng(f"privacy/{prof.name.value}"), batch_size=5, bus=bus)
    cat = lc.ee.caterpillar
    a = cat.keypair.private_scalar
    secrets = [a.to_bytes(32, "big"), a.to_bytes(32, "little"), cat.expansion_key]
    aca_inbound = bus.inbound("ACA")
    assert len(aca_inbound) == 5
    for entry in aca_inbound:
        assert all(s not in entry.data for s in secrets)
    # the expansion key only ever travels encrypted
    for entry in bus.transcript:
        assert cat.expansion_key not in entry.data
        assert a.to_bytes(32, "big") not in entry.data


def test_transcript_matches_golden(tmp_path):
    for prof in ALL_PROFILES:
        tag = prof.name.value.lower()
        rng = SeededRng(f"{FIXTURE_SEED}/{tag}")
        bus = MessageBus()
        run_lifecycle(prof, rng.fork("pki"), batch_size=TRANSCRIPT_BATCH, payload=rng.fork("bsm").randbytes(200),
                      bus=bus)
        out = tmp_path / f"{tag}.txt"
        bus.dump(out)
        golden = (FIXTURE_DIR / tag / "transcript.txt").read_text(encoding="utf-8")
        assert out.read_text(encoding="utf-8") == golden
        for line in golden.splitlines():
            assert re.fullmatch(r"(request|response) [A-Za-z-]+→[A-Za-z-]+ [0-9a-f]+", line), line


def test_transcripts_deterministic_under_seed(profile):
    a = _transcript(profile, seed="det").transcript
    b = _transcript(profile, seed="det").transcript
    assert a == b


def test_concurrent_devices_share_authorities():
    pki = _pki(SCMS, "threads")
    devices = [bootstrap_end_entity(pki, f"dev-{i}") for i in range(8)]
    errors = []

    def work(ee):
        try:
            enroll(pki, ee)
            authorize(pki, ee, 3)
        except Exception as exc:  # noqa: BLE001 - surfaced below
            errors.append(exc)

    threads = [threading.Thread(target=work, args=(ee,)) for ee in devices]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert errors == []
    aca = pki.authorities[Role.ACA]
    assert len(aca.issued_log) == len(set(aca.issued_log)) == 24
    assert len(pki.authorities[Role.ECA].issued_log) == 8
    chain = [aca.certificate, pki.root]
    for ee in devices:
        assert len(ee.authorization_credentials) == 3
        msg = sign_bsm(pki, ee, b"hi")
        assert verify_signed_data(SCMS, msg, None, chain, pki.now).accepted
    assert pki.authorities[Role.RA].batches == {}


def test_encrypted_hops_are_encrypted():
    bus = _transcript(SCMS)
    for entry in bus.transcript:
        if entry.name in ("EeRaCertRequestSpdu", "EeRaDownloadRequestSpdu", "RaEeDownloadBundle"):
            decode_signed_encrypted(entry.data)
