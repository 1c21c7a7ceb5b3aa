use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

use erasuresim::net::{connect, relay, run_over_loopback, serve_party, Frame, NetError, KIND_ERASURE, KIND_SILENCE};
use erasuresim_core::{run, NoisePattern, NoiseSource, PartyInput, Protocol, Role, RunConfig, SchemeKind};

fn pair() -> (TcpStream, TcpStream) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let client = connect(listener.local_addr().unwrap()).unwrap();
    let (server, _) = listener.accept().unwrap();
    (client, server)
}

#[test]
fn matches_simulator_on_every_input() {
    let p = Protocol::string_exchange(4).unwrap();
    for scheme in [SchemeKind::Basic4, SchemeKind::Ags4, SchemeKind::Ags1] {
        let w = scheme.layer().width() as u64;
        let noise = NoiseSource::Pattern(NoisePattern::from_iter([w, 3 * w + 1, 6 * w]));
        for x in PartyInput::all(2) {
            for y in PartyInput::all(2) {
                let sim =
                    run(&RunConfig::new(scheme, p.clone(), x.clone(), y.clone()).with_noise(noise.clone())).unwrap();
                let net = run_over_loopback(scheme, &p, &x, &y, &noise, 1000).unwrap();
                let tag = format!("{scheme} x={x} y={y}");
                assert_eq!(net.alice.output, sim.alice_output, "{tag}");
                assert_eq!(net.bob.output, sim.bob_output, "{tag}");
                assert_eq!(net.cc_sym(), sim.metrics.cc_sym, "{tag}");
                assert_eq!(net.relay.erased(), sim.metrics.erasures_counted, "{tag}");
                assert_eq!(net.erasures_logical(), sim.metrics.erasures_logical, "{tag}");
                assert_eq!(net.alice.exit_round, Some(sim.metrics.t_a), "{tag}");
            }
        }
    }
}

#[test]
fn greedy_relay_spends_whole_budget() {
    let p = Protocol::string_exchange(8).unwrap();
    let (x, y): (PartyInput, PartyInput) = ("1100".parse().unwrap(), "1010".parse().unwrap());
    let out = run_over_loopback(SchemeKind::Basic4, &p, &x, &y, &NoiseSource::Greedy { budget: 5 }, 1000).unwrap();
    assert_eq!(out.relay.erased(), 5);
    assert_eq!(out.relay.bob_to_alice.erased, 0);
    assert_eq!(out.cc_sym(), 8 + 2 * 5);
}

#[test]
fn party_rejects_out_of_order_frame() {
    let (party, mut fake_relay) = pair();
    let p = Protocol::string_exchange(4).unwrap();
    let bob = thread::spawn(move || serve_party(Role::Bob, SchemeKind::Basic4, &p, &"01".parse().unwrap(), party, 100));
    fake_relay.write_all(&Frame { seq: 2, kind: KIND_SILENCE }.to_bytes()).unwrap();
    let err = bob.join().unwrap().unwrap_err();
    assert!(matches!(err, NetError::SeqGap { expected: 1, got: 2 }), "{err}");
    assert!(err.is_protocol_violation());
}

#[test]
fn relay_rejects_erasure_mark_from_party() {
    let (mut alice, alice_side) = pair();
    let (mut bob, bob_side) = pair();
    let relay = thread::spawn(move || {
        let mut adversary = erasuresim::net::adversary_for(SchemeKind::Basic4, &NoiseSource::None);
        relay(alice_side, bob_side, SchemeKind::Basic4, adversary.as_mut())
    });
    alice.write_all(&Frame { seq: 1, kind: KIND_ERASURE }.to_bytes()).unwrap();
    let err = relay.join().unwrap().unwrap_err();
    assert!(matches!(err, NetError::ErasureFromParty), "{err}");
    let mut rest = Vec::new();
    let _ = bob.read_to_end(&mut rest);
    assert!(rest.is_empty());
}

#[test]
fn truncated_frame_is_transport_error() {
    let (party, mut fake_relay) = pair();
    let p = Protocol::string_exchange(4).unwrap();
    let bob = thread::spawn(move || serve_party(Role::Bob, SchemeKind::Ags4, &p, &"01".parse().unwrap(), party, 100));
    fake_relay.write_all(&[0, 0, 0]).unwrap();
    drop(fake_relay);
    let err = bob.join().unwrap().unwrap_err();
    assert!(matches!(err, NetError::Transport(_)), "{err}");
    assert!(!err.is_protocol_violation());
}
