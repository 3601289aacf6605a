use std::collections::{BTreeSet, HashMap};
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;
use serde::{Deserialize, Serialize};

use super::{sort_flows, FlowKey, FlowRecord, IngestError, PacketRecord, Protocol, TcpFlags, Termination};

/// Honeypot services with their standard (IANA) ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Service {
    Smb,
    Netbios,
    Http,
    Mysql,
    Ssh,
}

impl Service {
    pub const ALL: [Service; 5] = [Service::Smb, Service::Netbios, Service::Http, Service::Mysql, Service::Ssh];

    pub fn port(self) -> u16 {
        match self {
            Service::Smb => 445,
            Service::Netbios => 139,
            Service::Http => 80,
            Service::Mysql => 3306,
            Service::Ssh => 22,
        }
    }

    pub fn from_name(name: &str) -> Option<Service> {
        match name.to_ascii_lowercase().as_str() {
            "smb" => Some(Service::Smb),
            "netbios" => Some(Service::Netbios),
            "http" => Some(Service::Http),
            "mysql" => Some(Service::Mysql),
            "ssh" => Some(Service::Ssh),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssemblyConfig {
    /// Inactivity window in seconds after which a flow expires.
    pub flow_timeout: f64,
    /// Maximum flow age in seconds.
    pub flow_lifetime: f64,
    /// Victim ports to keep; empty keeps everything.
    pub production_ports: BTreeSet<u16>,
    /// Address ranges belonging to the honeypot. The endpoint outside these
    /// ranges is the attacker. Empty means "destination is the victim".
    pub honeypot_ranges: Vec<Ipv4Net>,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            flow_timeout: 60.0,
            flow_lifetime: 300.0,
            production_ports: BTreeSet::new(),
            honeypot_ranges: Vec::new(),
        }
    }
}

impl AssemblyConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if !(self.flow_timeout > 0.0 && self.flow_timeout <= self.flow_lifetime) {
            return Err(IngestError::InvalidConfig(format!(
                "need 0 < flow_timeout ({}) <= flow_lifetime ({})",
                self.flow_timeout, self.flow_lifetime
            )));
        }
        Ok(())
    }

    pub fn with_services(mut self, services: &[Service]) -> Self {
        self.production_ports = services.iter().map(|s| s.port()).collect();
        self
    }

    fn is_honeypot(&self, ip: Ipv4Addr) -> bool {
        self.honeypot_ranges.iter().any(|net| net.contains(&ip))
    }

    /// Orient a packet as attacker -> victim, or `None` when neither or both
    /// endpoints are honeypot addresses.
    fn orient(&self, p: &PacketRecord) -> Option<FlowKey> {
        let attacker_is_src = if self.honeypot_ranges.is_empty() {
            true
        } else {
            match (self.is_honeypot(p.src_ip), self.is_honeypot(p.dst_ip)) {
                (false, true) => true,
                (true, false) => false,
                _ => return None,
            }
        };
        Some(if attacker_is_src {
            FlowKey {
                attacker_ip: p.src_ip,
                attacker_port: p.src_port,
                victim_ip: p.dst_ip,
                victim_port: p.dst_port,
                protocol: p.protocol,
            }
        } else {
            FlowKey {
                attacker_ip: p.dst_ip,
                attacker_port: p.dst_port,
                victim_ip: p.src_ip,
                victim_port: p.src_port,
                protocol: p.protocol,
            }
        })
    }

    pub(crate) fn keeps_port(&self, victim_port: u16) -> bool {
        self.production_ports.is_empty() || self.production_ports.contains(&victim_port)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AssemblyStats {
    pub packets_in: usize,
    /// Packets whose endpoints could not be oriented (victim-to-victim or
    /// no honeypot endpoint).
    pub skipped_direction: usize,
    /// Packets to non-production victim ports.
    pub skipped_port: usize,
    pub flows_out: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyOutput {
    pub flows: Vec<FlowRecord>,
    pub stats: AssemblyStats,
}

struct Active {
    start: f64,
    last: f64,
    packets: u64,
}

fn close(key: &FlowKey, a: &Active, termination: Termination) -> FlowRecord {
    FlowRecord {
        attacker_ip: key.attacker_ip,
        attacker_port: key.attacker_port,
        victim_ip: key.victim_ip,
        victim_port: key.victim_port,
        protocol: key.protocol,
        start: a.start,
        end: a.last,
        packet_count: a.packets,
        termination,
    }
}

/// Group packets into flows keyed by (attacker ip/port, victim ip/port,
/// protocol).
///
/// A flow ends after a FIN or RST packet (TCP only), when the gap to the next
/// packet exceeds `flow_timeout`, or when the next packet would make it older
/// than `flow_lifetime`. Flows still open when the capture ends are closed as
/// `TIMEOUT` if they have been idle longer than the timeout and
/// `END_OF_CAPTURE` otherwise. Output is sorted by start time then key.
pub fn assemble_flows(packets: &[PacketRecord], cfg: &AssemblyConfig) -> Result<AssemblyOutput, IngestError> {
    cfg.validate()?;
    let mut stats = AssemblyStats { packets_in: packets.len(), ..Default::default() };

    let mut oriented: Vec<(FlowKey, &PacketRecord)> = Vec::with_capacity(packets.len());
    for p in packets {
        let Some(key) = cfg.orient(p) else {
            stats.skipped_direction += 1;
            continue;
        };
        if !cfg.keeps_port(key.victim_port) {
            stats.skipped_port += 1;
            continue;
        }
        oriented.push((key, p));
    }
    oriented.sort_by(|a, b| a.1.timestamp.total_cmp(&b.1.timestamp));

    let mut active: HashMap<FlowKey, Active> = HashMap::new();
    let mut flows = Vec::new();
    for (key, p) in &oriented {
        let t = p.timestamp;
        if let Some(a) = active.get_mut(key) {
            let expired = if t - a.last > cfg.flow_timeout {
                Some(Termination::Timeout)
            } else if t - a.start > cfg.flow_lifetime {
                Some(Termination::Lifetime)
            } else {
                None
            };
            match expired {
                Some(term) => {
                    flows.push(close(key, a, term));
                    *a = Active { start: t, last: t, packets: 1 };
                }
                None => {
                    a.last = t;
                    a.packets += 1;
                }
            }
        } else {
            active.insert(*key, Active { start: t, last: t, packets: 1 });
        }

        if p.protocol == Protocol::Tcp {
            let term = if p.tcp_flags.contains(TcpFlags::RST) {
                Some(Termination::Rst)
            } else if p.tcp_flags.contains(TcpFlags::FIN) {
                Some(Termination::Fin)
            } else {
                None
            };
            if let Some(term) = term {
                let a = active.remove(key).expect("flow inserted above");
                flows.push(close(key, &a, term));
            }
        }
    }

    let capture_end = oriented.last().map(|(_, p)| p.timestamp).unwrap_or(0.0);
    for (key, a) in &active {
        let term = if capture_end - a.last > cfg.flow_timeout {
            Termination::Timeout
        } else {
            Termination::EndOfCapture
        };
        flows.push(close(key, a, term));
    }
    sort_flows(&mut flows);
    stats.flows_out = flows.len();
    Ok(AssemblyOutput { flows, stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pkt(t: f64, flags: TcpFlags) -> PacketRecord {
        PacketRecord {
            timestamp: t,
            src_ip: Ipv4Addr::new(1, 1, 1, 1),
            dst_ip: Ipv4Addr::new(10, 0, 0, 2),
            src_port: 4000,
            dst_port: 445,
            protocol: Protocol::Tcp,
            tcp_flags: flags,
            payload_len: 0,
        }
    }

    fn run(packets: &[PacketRecord]) -> Vec<FlowRecord> {
        assemble_flows(packets, &AssemblyConfig::default()).unwrap().flows
    }

    #[test]
    fn gap_59_stays_one_flow() {
        let flows = run(&[pkt(0.0, TcpFlags::SYN), pkt(59.0, TcpFlags::ACK)]);
        assert_eq!(flows.len(), 1);
        assert_eq!(flows[0].termination, Termination::EndOfCapture);
        assert_eq!(flows[0].packet_count, 2);
    }

    #[test]
    fn gap_61_splits_on_timeout() {
        let flows = run(&[pkt(0.0, TcpFlags::SYN), pkt(61.0, TcpFlags::ACK)]);
        assert_eq!(flows.len(), 2);
        assert_eq!(flows[0].termination, Termination::Timeout);
        assert_eq!(flows[1].termination, Termination::EndOfCapture);
    }

    #[test]
    fn lone_syn_is_a_flow() {
        let flows = run(&[pkt(5.0, TcpFlags::SYN)]);
        assert_eq!(flows.len(), 1);
        assert_eq!(flows[0].packet_count, 1);
        assert_eq!(flows[0].start, flows[0].end);
    }

    #[test]
    fn fin_closes_and_next_packet_opens_new_flow() {
        let flows = run(&[pkt(0.0, TcpFlags::SYN), pkt(1.0, TcpFlags::FIN | TcpFlags::ACK), pkt(2.0, TcpFlags::SYN)]);
        assert_eq!(flows.len(), 2);
        assert_eq!(flows[0].termination, Termination::Fin);
        assert_eq!(flows[0].packet_count, 2);
        assert_eq!(flows[1].start, 2.0);
    }

    #[test]
    fn rst_wins_over_fin() {
        let flows = run(&[pkt(0.0, TcpFlags::RST | TcpFlags::FIN)]);
        assert_eq!(flows[0].termination, Termination::Rst);
    }

    #[test]
    fn udp_ignores_flags_and_times_out() {
        let mut a = pkt(0.0, TcpFlags::empty());
        a.protocol = Protocol::Udp;
        let mut b = a.clone();
        b.timestamp = 100.0;
        let flows = run(&[a, b]);
        assert_eq!(flows.len(), 2);
        assert_eq!(flows[0].termination, Termination::Timeout);
    }

    #[test]
    fn lifetime_boundary() {
        let keep: Vec<_> = (0..=5).map(|i| pkt(i as f64 * 50.0, TcpFlags::ACK)).chain([pkt(299.0, TcpFlags::ACK)]).collect();
        let flows = run(&keep);
        assert_eq!(flows.len(), 1);
        assert_eq!(flows[0].end - flows[0].start, 299.0);

        let split: Vec<_> = (0..=6).map(|i| pkt(i as f64 * 50.0, TcpFlags::ACK)).chain([pkt(301.0, TcpFlags::ACK)]).collect();
        let flows = run(&split);
        assert_eq!(flows.len(), 2);
        assert_eq!(flows[0].termination, Termination::Lifetime);
        assert_eq!(flows[0].end, 300.0);
        assert_eq!(flows[1].start, 301.0);
    }

    #[test]
    fn replies_join_the_attackers_flow() {
        let cfg = AssemblyConfig { honeypot_ranges: vec!["10.0.0.0/24".parse().unwrap()], ..Default::default() };
        let a = pkt(0.0, TcpFlags::SYN);
        let mut reply = pkt(0.5, TcpFlags::SYN | TcpFlags::ACK);
        std::mem::swap(&mut reply.src_ip, &mut reply.dst_ip);
        std::mem::swap(&mut reply.src_port, &mut reply.dst_port);
        let mut internal = pkt(0.7, TcpFlags::SYN);
        internal.src_ip = Ipv4Addr::new(10, 0, 0, 9);
        let out = assemble_flows(&[a, reply, internal], &cfg).unwrap();
        assert_eq!(out.flows.len(), 1);
        assert_eq!(out.flows[0].attacker_ip, Ipv4Addr::new(1, 1, 1, 1));
        assert_eq!(out.flows[0].packet_count, 2);
        assert_eq!(out.stats.skipped_direction, 1);
    }

    #[test]
    fn non_production_ports_dropped() {
        let cfg = AssemblyConfig::default().with_services(&[Service::Ssh, Service::Http]);
        let out = assemble_flows(&[pkt(0.0, TcpFlags::SYN)], &cfg).unwrap();
        assert!(out.flows.is_empty());
        assert_eq!(out.stats.skipped_port, 1);
    }

    #[test]
    fn rejects_timeout_above_lifetime() {
        let cfg = AssemblyConfig { flow_timeout: 400.0, ..Default::default() };
        assert!(assemble_flows(&[], &cfg).is_err());
    }

    #[test]
    fn service_ports() {
        let ports: Vec<u16> = Service::ALL.iter().map(|s| s.port()).collect();
        assert_eq!(ports, vec![445, 139, 80, 3306, 22]);
        assert_eq!(Service::from_name("SSH"), Some(Service::Ssh));
    }
}
