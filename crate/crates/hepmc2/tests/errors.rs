use hepmc2::{Error, GenEvent, Reader};

fn read_events(text: &str) -> Result<Vec<GenEvent>, Error> {
    let mut reader = Reader::new(text.as_bytes());
    let mut events = Vec::new();
    while let Some(ev) = reader.next_event() {
        events.push(ev?);
    }
    Ok(events)
}

fn read_err(text: &str) -> Error {
    match read_events(text) {
        Ok(events) => panic!("parsed {} events from bad input", events.len()),
        Err(e) => e,
    }
}

const HEADER: &str = "HepMC::Version 2.06.09\nHepMC::IO_GenEvent-START_EVENT_LISTING\n";
const FOOTER: &str = "HepMC::IO_GenEvent-END_EVENT_LISTING\n";

#[test]
fn garbage_without_a_listing_header_is_rejected() {
    match read_err("hello\nworld\n") {
        Error::NoEventListing => {}
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn eof_inside_an_event_is_reported() {
    // E on line 3 declares two vertices, the file stops after the first
    let text = format!(
        "{HEADER}E 1 0 1.0 0.0 0.0 0 0 2 0 0 0 0\nV -1 0 0.0 0.0 0.0 0.0 0 1 0\nP 1 22 0.0 0.0 1.0 1.0 0.0 1 0.0 0.0 0 0\n"
    );
    match read_err(&text) {
        Error::UnexpectedEof { line: 5 } => {}
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn a_missing_end_sentinel_is_reported() {
    let text = format!(
        "{HEADER}E 1 0 1.0 0.0 0.0 0 0 1 0 0 0 0\nV -1 0 0.0 0.0 0.0 0.0 0 1 0\nP 1 22 0.0 0.0 1.0 1.0 0.0 1 0.0 0.0 0 0\n"
    );
    let mut reader = Reader::new(text.as_bytes());
    assert!(reader.next_event().unwrap().is_ok());
    match reader.next_event() {
        Some(Err(Error::UnexpectedEof { line: 5 })) => {}
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn bad_fields_report_the_line_and_what_was_expected() {
    let text = format!(
        "{HEADER}E 1 0 1.0 0.0 0.0 0 0 1 0 0 0 0\nV -1 0 0.0 0.0 0.0 0.0 0 1 0\nP 1 22 0.0 0.0 abc 1.0 0.0 1 0.0 0.0 0 0\n{FOOTER}"
    );
    match read_err(&text) {
        Error::MalformedLine { line: 5, reason } => {
            assert!(reason.contains("pz") && reason.contains("abc"), "{reason}")
        }
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn trailing_fields_are_rejected() {
    let text = format!(
        "{HEADER}E 1 0 1.0 0.0 0.0 0 0 1 0 0 0 0\nV -1 0 0.0 0.0 0.0 0.0 0 1 0 9.9\n"
    );
    match read_err(&text) {
        Error::MalformedLine { line: 4, reason } => {
            assert!(reason.contains("trailing field `9.9`"), "{reason}")
        }
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn a_short_weight_list_is_rejected() {
    // the E record announces two weights but carries only one
    let text = format!("{HEADER}E 1 0 1.0 0.0 0.0 0 0 1 0 0 0 2 0.5\n");
    match read_err(&text) {
        Error::MalformedLine { line: 3, reason } => {
            assert!(reason.contains("missing weight"), "{reason}")
        }
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn vertex_barcodes_must_be_negative() {
    let text = format!("{HEADER}E 1 0 1.0 0.0 0.0 0 0 1 0 0 0 0\nV 7 0 0.0 0.0 0.0 0.0 0 1 0\n");
    match read_err(&text) {
        Error::MalformedLine { line: 4, reason } => {
            assert!(reason.contains("not negative"), "{reason}")
        }
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn duplicate_vertex_barcodes_clash() {
    let text = format!(
        "{HEADER}E 1 0 1.0 0.0 0.0 0 0 2 0 0 0 0\n\
         V -1 0 0.0 0.0 0.0 0.0 0 1 0\n\
         P 1 22 0.0 0.0 1.0 1.0 0.0 1 0.0 0.0 0 0\n\
         V -1 0 0.0 0.0 0.0 0.0 0 1 0\n"
    );
    match read_err(&text) {
        Error::BarcodeClash { line: 6, barcode: -1 } => {}
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn duplicate_particle_barcodes_clash() {
    let text = format!(
        "{HEADER}E 1 0 1.0 0.0 0.0 0 0 1 0 0 0 0\n\
         V -1 0 0.0 0.0 0.0 0.0 0 2 0\n\
         P 1 22 0.0 0.0 1.0 1.0 0.0 1 0.0 0.0 0 0\n\
         P 1 22 0.0 0.0 1.0 1.0 0.0 1 0.0 0.0 0 0\n"
    );
    match read_err(&text) {
        Error::BarcodeClash { line: 6, barcode: 1 } => {}
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn an_end_vertex_that_never_appears_is_detected() {
    let text = format!(
        "{HEADER}E 1 0 1.0 0.0 0.0 0 0 1 0 0 0 0\n\
         V -1 0 0.0 0.0 0.0 0.0 0 1 0\n\
         P 1 22 0.0 0.0 1.0 1.0 0.0 2 0.0 0.0 -7 0\n{FOOTER}"
    );
    match read_err(&text) {
        Error::DanglingEndVertex { particle: 1, vertex: -7 } => {}
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn orphans_must_end_at_the_vertex_that_lists_them() {
    let text = format!(
        "{HEADER}E 1 0 1.0 0.0 0.0 0 0 1 0 0 0 0\n\
         V -1 0 0.0 0.0 0.0 0.0 1 1 0\n\
         P 1 22 0.0 0.0 1.0 1.0 0.0 3 0.0 0.0 0 0\n"
    );
    match read_err(&text) {
        Error::MalformedLine { line: 5, reason } => {
            assert!(reason.contains("listed under -1"), "{reason}")
        }
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn junk_between_events_is_rejected() {
    let text = format!(
        "{HEADER}E 1 0 1.0 0.0 0.0 0 0 1 0 0 0 0\n\
         V -1 0 0.0 0.0 0.0 0.0 0 1 0\n\
         P 1 22 0.0 0.0 1.0 1.0 0.0 1 0.0 0.0 0 0\n\
         X not an event\n{FOOTER}"
    );
    let mut reader = Reader::new(text.as_bytes());
    assert!(reader.next_event().unwrap().is_ok());
    match reader.next_event() {
        Some(Err(Error::MalformedLine { line: 6, reason })) => {
            assert!(reason.contains("expected an E record"), "{reason}")
        }
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn unknown_units_are_rejected() {
    let text = format!("{HEADER}E 1 0 1.0 0.0 0.0 0 0 1 0 0 0 0\nU TEV MM\n");
    match read_err(&text) {
        Error::MalformedLine { line: 4, reason } => {
            assert!(reason.contains("unknown momentum unit `TEV`"), "{reason}")
        }
        other => panic!("unexpected: {other:?}"),
    }
}

#[test]
fn the_stream_stays_done_after_an_error() {
    let mut reader = Reader::new("no listing here\n".as_bytes());
    assert!(matches!(
        reader.next_event(),
        Some(Err(Error::NoEventListing))
    ));
    assert!(reader.next_event().is_none());
}

#[test]
fn a_missing_signal_vertex_is_only_a_warning() {
    let text = format!(
        "{HEADER}E 1 0 1.0 0.0 0.0 0 -99 1 0 0 0 0\n\
         V -1 0 0.0 0.0 0.0 0.0 0 1 0\n\
         P 1 22 0.0 0.0 1.0 1.0 0.0 1 0.0 0.0 0 0\n{FOOTER}"
    );
    let mut reader = Reader::new(text.as_bytes());
    let ev = reader.next_event().unwrap().unwrap();
    assert_eq!(ev.signal_process_vertex, -99);
    assert_eq!(
        reader.warnings(),
        ["event 1: signal process vertex -99 not in event"]
    );
    assert!(reader.next_event().is_none());
}
