//! Profiler output ingestion and evidence bundles for the analysis agent.
//!
//! Two input families are accepted: CSV reports from the command-line
//! profiler's `stats` exporter (one summary table per file), and PNG
//! screenshots of the GUI profiler's summary, memory and timeline views.
//! Both are reduced to a bounded, deterministically ordered
//! [`ProfileBundle`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::digest;

/// Largest tolerated gap between a row's total time and avg × calls.
pub const ROW_CONSISTENCY_TOLERANCE_NS: f64 = 1_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    ApiSummary,
    GpuKernelSummary,
    MemoryTransferSummary,
    RangeSummary,
}

impl ReportKind {
    pub const ALL: [ReportKind; 4] = [
        ReportKind::ApiSummary,
        ReportKind::GpuKernelSummary,
        ReportKind::MemoryTransferSummary,
        ReportKind::RangeSummary,
    ];

    pub fn title(self) -> &'static str {
        match self {
            ReportKind::ApiSummary => "API call summary",
            ReportKind::GpuKernelSummary => "GPU kernel summary",
            ReportKind::MemoryTransferSummary => "Memory transfer summary",
            ReportKind::RangeSummary => "Range summary",
        }
    }

    fn from_file_name(name: &str) -> Option<Self> {
        let n = name.to_ascii_lowercase();
        if n.contains("cuda_api_sum") || n.contains("api_summary") {
            Some(ReportKind::ApiSummary)
        } else if n.contains("gpu_kern_sum") || n.contains("kernel_summary") {
            Some(ReportKind::GpuKernelSummary)
        } else if n.contains("gpu_mem_time_sum") || n.contains("memory_summary") || n.contains("memory_transfer") {
            Some(ReportKind::MemoryTransferSummary)
        } else if n.contains("nvtx") || n.contains("range_summary") {
            Some(ReportKind::RangeSummary)
        } else {
            None
        }
    }

    fn from_header(cols: &Columns) -> Option<Self> {
        match (cols.name_header.as_str(), cols.calls_header.as_str()) {
            ("Range", _) => Some(ReportKind::RangeSummary),
            ("Operation", _) => Some(ReportKind::MemoryTransferSummary),
            ("Name", "Num Calls" | "Calls") => Some(ReportKind::ApiSummary),
            ("Name", "Instances") => Some(ReportKind::GpuKernelSummary),
            _ => None,
        }
    }

    /// Column names used when writing rows back out.
    fn canonical_header(self) -> [&'static str; 5] {
        let (calls, name) = match self {
            ReportKind::ApiSummary => ("Num Calls", "Name"),
            ReportKind::GpuKernelSummary => ("Instances", "Name"),
            ReportKind::MemoryTransferSummary => ("Count", "Operation"),
            ReportKind::RangeSummary => ("Instances", "Range"),
        };
        ["Time (%)", "Total Time (ns)", calls, "Avg (ns)", name]
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

/// One row of a summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelStatRow {
    pub name: String,
    pub total_time_ns: f64,
    pub calls: u64,
    pub avg_ns: f64,
    /// Share of the table's total time, 0 to 100.
    pub pct_time: f64,
}

impl KernelStatRow {
    pub fn is_consistent(&self) -> bool {
        (self.total_time_ns - self.avg_ns * self.calls as f64).abs() <= ROW_CONSISTENCY_TOLERANCE_NS
    }
}

/// A CSV file whose header matched no known report kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpaqueReport {
    pub title: String,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParsedReports {
    pub tables: BTreeMap<ReportKind, Vec<KernelStatRow>>,
    pub opaque: Vec<OpaqueReport>,
    /// Data rows dropped because they could not be parsed.
    pub skipped_rows: usize,
}

impl ParsedReports {
    pub fn rows(&self, kind: ReportKind) -> &[KernelStatRow] {
        self.tables.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }

    fn merge(&mut self, other: ParsedReports) {
        for (k, rows) in other.tables {
            self.tables.entry(k).or_default().extend(rows);
        }
        self.opaque.extend(other.opaque);
        self.skipped_rows += other.skipped_rows;
    }
}

struct Columns {
    pct: usize,
    total: usize,
    calls: usize,
    avg: usize,
    name: usize,
    calls_header: String,
    name_header: String,
}

fn find_columns(header: &csv::StringRecord) -> Option<Columns> {
    let pos = |names: &[&str]| {
        header
            .iter()
            .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
    };
    let calls = pos(&["Num Calls", "Instances", "Count", "Calls"])?;
    let name = pos(&["Name", "Operation", "Range"])?;
    Some(Columns {
        pct: pos(&["Time (%)", "Time(%)"])?,
        total: pos(&["Total Time (ns)", "Total Time"])?,
        calls,
        avg: pos(&["Avg (ns)", "Average (ns)", "Avg"])?,
        name,
        calls_header: header[calls].trim().to_string(),
        name_header: header[name].trim().to_string(),
    })
}

fn parse_number(field: &str) -> Option<f64> {
    let v: f64 = field.trim().replace(',', "").parse().ok()?;
    v.is_finite().then_some(v)
}

fn parse_row(rec: &csv::StringRecord, cols: &Columns) -> Option<KernelStatRow> {
    let calls = parse_number(rec.get(cols.calls)?)?;
    if calls < 0.0 || calls.fract() != 0.0 {
        return None;
    }
    let pct = parse_number(rec.get(cols.pct)?)?;
    if !(0.0..=100.0).contains(&pct) {
        return None;
    }
    Some(KernelStatRow {
        name: rec.get(cols.name)?.trim().to_string(),
        total_time_ns: parse_number(rec.get(cols.total)?)?,
        calls: calls as u64,
        avg_ns: parse_number(rec.get(cols.avg)?)?,
        pct_time: pct,
    })
}

/// Parses one stats CSV. `file_name` helps recognize the report kind;
/// the header decides when the name does not.
pub fn parse_stats_csv(file_name: &str, text: &str) -> ParsedReports {
    let mut out = ParsedReports::default();
    let opaque = |out: &mut ParsedReports| {
        out.opaque.push(OpaqueReport {
            title: file_name.to_string(),
            text: text.to_string(),
        })
    };
    // The exporter may print progress lines before the table.
    let Some(start) = text
        .lines()
        .scan(0usize, |off, line| {
            let here = *off;
            *off += line.len() + 1;
            Some((here, line))
        })
        .find(|(_, l)| l.contains("Total Time"))
        .map(|(off, _)| off)
    else {
        opaque(&mut out);
        return out;
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(&text.as_bytes()[start..]);
    let cols = match reader.headers().ok().and_then(find_columns) {
        Some(c) => c,
        None => {
            opaque(&mut out);
            return out;
        }
    };
    let Some(kind) = ReportKind::from_file_name(file_name).or_else(|| ReportKind::from_header(&cols)) else {
        opaque(&mut out);
        return out;
    };
    let width = reader.headers().map(|h| h.len()).unwrap_or(0);
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let parsed = rec.ok().filter(|r| r.len() == width).and_then(|r| parse_row(&r, &cols));
        match parsed {
            Some(row) => rows.push(row),
            None => {
                log::warn!("{file_name}: skipping malformed row {}", i + 2);
                out.skipped_rows += 1;
            }
        }
    }
    out.tables.insert(kind, rows);
    out
}

/// Parses every `*.csv` file in `dir`, in file-name order.
pub fn parse_stats_reports(dir: &Path) -> std::io::Result<ParsedReports> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    let mut out = ParsedReports::default();
    for path in files {
        let text = fs::read_to_string(&path)?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        out.merge(parse_stats_csv(&name, &text));
    }
    Ok(out)
}

/// Writes rows back out in the exporter's layout.
pub fn rows_to_csv(kind: ReportKind, rows: &[KernelStatRow]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(kind.canonical_header()).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.pct_time.to_string(),
            r.total_time_ns.to_string(),
            r.calls.to_string(),
            r.avg_ns.to_string(),
            r.name.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    TextTable,
    Image,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidencePayload {
    Text(String),
    Image(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub kind: EvidenceKind,
    pub title: String,
    pub payload: EvidencePayload,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileBundle {
    pub items: Vec<EvidenceItem>,
    pub source_backend: Backend,
}

impl ProfileBundle {
    pub fn digests(&self) -> Vec<String> {
        self.items.iter().map(|i| i.digest.clone()).collect()
    }

    pub fn has_images(&self) -> bool {
        self.items.iter().any(|i| i.kind == EvidenceKind::Image)
    }

    /// Copy without image items, for text-only analysis models.
    pub fn text_only(&self) -> ProfileBundle {
        ProfileBundle {
            items: self.items.iter().filter(|i| i.kind == EvidenceKind::TextTable).cloned().collect(),
            source_backend: self.source_backend,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleBudget {
    pub max_rows: usize,
    pub max_images: usize,
}

impl Default for BundleBudget {
    fn default() -> Self {
        BundleBudget {
            max_rows: 20,
            max_images: 3,
        }
    }
}

/// Raw profiler outputs collected for one candidate.
#[derive(Debug, Clone, Default)]
pub struct EvidenceInputs {
    pub reports: ParsedReports,
    pub screenshots: Vec<PathBuf>,
}

impl EvidenceInputs {
    /// Sorts artifact paths into reports and screenshots. Directories are
    /// scanned one level deep; capture files such as GPU traces are
    /// ignored.
    pub fn collect(artifacts: &[PathBuf]) -> std::io::Result<Self> {
        let mut inputs = EvidenceInputs::default();
        for path in artifacts {
            if path.is_dir() {
                if path.extension().is_some_and(|e| e == "gputrace") {
                    continue;
                }
                inputs.reports.merge(parse_stats_reports(path)?);
                let mut pngs: Vec<PathBuf> = fs::read_dir(path)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| is_png(p))
                    .collect();
                pngs.sort();
                inputs.screenshots.extend(pngs);
            } else if is_png(path) {
                inputs.screenshots.push(path.clone());
            } else if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                inputs.reports.merge(parse_stats_csv(&name, &fs::read_to_string(path)?));
            }
        }
        Ok(inputs)
    }
}

fn is_png(p: &Path) -> bool {
    p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    #[error("no profiling evidence")]
    NoEvidence,
    #[error("cannot read screenshot {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

const VIEW_ORDER: [&str; 3] = ["summary", "memory", "timeline"];

/// Rank of a screenshot by view: summary, memory, timeline, then others.
fn view_rank(path: &Path) -> usize {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    VIEW_ORDER
        .iter()
        .position(|v| stem.starts_with(v))
        .unwrap_or(VIEW_ORDER.len())
}

/// Assembles a bounded bundle: each table keeps its `max_rows` largest rows
/// by total time, screenshots are capped at `max_images` in view order.
/// Tables come first, in report-kind order, then opaque reports, then
/// images.
pub fn build_bundle(
    inputs: &EvidenceInputs,
    budget: BundleBudget,
    source_backend: Backend,
) -> Result<ProfileBundle, BundleError> {
    let mut items = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |items: &mut Vec<EvidenceItem>, item: EvidenceItem| {
        if seen.insert(item.digest.clone()) {
            items.push(item);
        }
    };

    for kind in ReportKind::ALL {
        let rows = inputs.reports.rows(kind);
        if rows.is_empty() || budget.max_rows == 0 {
            continue;
        }
        let mut top = rows.to_vec();
        top.sort_by(|a, b| {
            b.total_time_ns
                .total_cmp(&a.total_time_ns)
                .then_with(|| a.name.cmp(&b.name))
        });
        top.truncate(budget.max_rows);
        let text = rows_to_csv(kind, &top);
        let title = if top.len() < rows.len() {
            format!("{} (top {} of {} by total time)", kind.title(), top.len(), rows.len())
        } else {
            kind.title().to_string()
        };
        push(
            &mut items,
            EvidenceItem {
                kind: EvidenceKind::TextTable,
                title,
                digest: digest::sha256_hex(&text),
                payload: EvidencePayload::Text(text),
            },
        );
    }

    for report in &inputs.reports.opaque {
        if report.text.trim().is_empty() {
            continue;
        }
        let text: String = report
            .text
            .lines()
            .take(budget.max_rows + 1)
            .collect::<Vec<_>>()
            .join("\n");
        push(
            &mut items,
            EvidenceItem {
                kind: EvidenceKind::TextTable,
                title: report.title.clone(),
                digest: digest::sha256_hex(&text),
                payload: EvidencePayload::Text(text),
            },
        );
    }

    let mut shots = inputs.screenshots.clone();
    shots.sort_by(|a, b| view_rank(a).cmp(&view_rank(b)).then_with(|| a.cmp(b)));
    let mut images = 0;
    for path in shots {
        if images >= budget.max_images {
            break;
        }
        let bytes = fs::read(&path).map_err(|source| BundleError::Image {
            path: path.clone(),
            source,
        })?;
        let before = items.len();
        push(
            &mut items,
            EvidenceItem {
                kind: EvidenceKind::Image,
                title: path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                digest: digest::sha256_hex(&bytes),
                payload: EvidencePayload::Image(path),
            },
        );
        if items.len() > before {
            images += 1;
        }
    }

    if items.is_empty() {
        return Err(BundleError::NoEvidence);
    }
    Ok(ProfileBundle { items, source_backend })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const KERNELS: &str = "\
Time (%),Total Time (ns),Instances,Avg (ns),Med (ns),Min (ns),Max (ns),StdDev (ns),Name
61.5,1230000,100,12300.0,12288.0,12000,13100,220.5,\"relu_kernel(const float *, float *, long)\"
30.0,600000,200,3000.0,2990.0,2900,3300,50.1,vectorized_elementwise_kernel
8.5,170000,100,1700.0,1700.0,1650,1800,20.0,reduce_kernel
";

    #[test]
    fn kernel_summary_rows() {
        let parsed = parse_stats_csv("report_cuda_gpu_kern_sum.csv", KERNELS);
        let rows = parsed.rows(ReportKind::GpuKernelSummary);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].name, "relu_kernel(const float *, float *, long)");
        assert_eq!(rows[1].calls, 200);
        assert!(rows.iter().all(KernelStatRow::is_consistent));
        assert!(rows.iter().map(|r| r.pct_time).sum::<f64>() <= 100.0);
    }

    #[test]
    fn kind_from_header_when_name_is_generic() {
        let parsed = parse_stats_csv("stats.csv", KERNELS);
        assert_eq!(parsed.rows(ReportKind::GpuKernelSummary).len(), 3);
    }

    #[test]
    fn header_only_is_empty() {
        let parsed = parse_stats_csv(
            "x_cuda_api_sum.csv",
            "Time (%),Total Time (ns),Num Calls,Avg (ns),Med (ns),Min (ns),Max (ns),StdDev (ns),Name\n",
        );
        assert!(parsed.tables[&ReportKind::ApiSummary].is_empty());
        assert!(parsed.opaque.is_empty());
    }

    #[test]
    fn unknown_header_is_opaque() {
        let parsed = parse_stats_csv("osrt.csv", "a,b,c\n1,2,3\n");
        assert!(parsed.tables.is_empty());
        assert_eq!(parsed.opaque.len(), 1);
        assert_eq!(parsed.opaque[0].title, "osrt.csv");
    }

    #[test]
    fn malformed_rows_skipped() {
        let text = "\
Time (%),Total Time (ns),Num Calls,Avg (ns),Name
50.0,1000,10,100.0,cudaLaunchKernel
oops,not,a,row,x
50.0,1000,10
40.0,1000,2.5,400.0,fractional_calls
";
        let parsed = parse_stats_csv("run_cuda_api_sum.csv", text);
        assert_eq!(parsed.rows(ReportKind::ApiSummary).len(), 1);
        assert_eq!(parsed.skipped_rows, 3);
    }

    #[test]
    fn leading_progress_lines_are_ignored() {
        let text = format!("Processing [report.sqlite] with [cuda_gpu_kern_sum.py]...\n{KERNELS}");
        let parsed = parse_stats_csv("kern.csv", &text);
        assert_eq!(parsed.rows(ReportKind::GpuKernelSummary).len(), 3);
    }

    fn rows(n: usize) -> Vec<KernelStatRow> {
        (0..n)
            .map(|i| KernelStatRow {
                name: format!("k{i:02}"),
                total_time_ns: ((i * 37) % 50) as f64 * 1000.0 + i as f64,
                calls: 10,
                avg_ns: 0.0,
                pct_time: 1.0,
            })
            .collect()
    }

    #[test]
    fn bundle_keeps_top_rows_by_total_time() {
        let mut inputs = EvidenceInputs::default();
        inputs.reports.tables.insert(ReportKind::GpuKernelSummary, rows(50));
        let b = build_bundle(&inputs, BundleBudget::default(), Backend::Cuda).unwrap();
        assert_eq!(b.items.len(), 1);
        let EvidencePayload::Text(text) = &b.items[0].payload else { panic!() };
        let back = parse_stats_csv("k_cuda_gpu_kern_sum.csv", text);
        let kept = back.rows(ReportKind::GpuKernelSummary);
        assert_eq!(kept.len(), 20);
        assert!(kept.windows(2).all(|w| w[0].total_time_ns >= w[1].total_time_ns));
        let mut all: Vec<f64> = rows(50).iter().map(|r| r.total_time_ns).collect();
        all.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(kept.iter().map(|r| r.total_time_ns).collect::<Vec<_>>(), all[..20]);
        assert!(b.items[0].title.contains("top 20 of 50"));
    }

    #[test]
    fn screenshots_in_view_order() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = Vec::new();
        for name in ["timeline_0.png", "memory_0.png", "summary_0.png", "zz_other.png"] {
            let p = dir.path().join(name);
            fs::write(&p, name.as_bytes()).unwrap();
            paths.push(p);
        }
        let inputs = EvidenceInputs::collect(&[dir.path().to_path_buf()]).unwrap();
        let b = build_bundle(&inputs, BundleBudget::default(), Backend::Metal).unwrap();
        let titles: Vec<&str> = b.items.iter().map(|i| i.title.as_str()).collect();
        assert_eq!(titles, ["summary_0.png", "memory_0.png", "timeline_0.png"]);
        assert!(b.items.iter().all(|i| i.kind == EvidenceKind::Image));
    }

    #[test]
    fn mixed_inputs_keep_kinds() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("report_cuda_gpu_kern_sum.csv"), KERNELS).unwrap();
        fs::write(dir.path().join("summary.png"), b"png").unwrap();
        let inputs = EvidenceInputs::collect(&[dir.path().to_path_buf()]).unwrap();
        let b = build_bundle(&inputs, BundleBudget::default(), Backend::Cuda).unwrap();
        let kinds: Vec<EvidenceKind> = b.items.iter().map(|i| i.kind).collect();
        assert_eq!(kinds, [EvidenceKind::TextTable, EvidenceKind::Image]);
        assert_eq!(b.text_only().items.len(), 1);
    }

    #[test]
    fn empty_inputs_are_an_error() {
        let err = build_bundle(&EvidenceInputs::default(), BundleBudget::default(), Backend::Cuda).unwrap_err();
        assert_eq!(err.to_string(), "no profiling evidence");
    }

    fn row_strategy() -> impl Strategy<Value = KernelStatRow> {
        (
            "[a-zA-Z_][a-zA-Z0-9_ ,()<>*]{0,30}",
            0.0f64..1e9,
            0u64..100_000,
            0.0f64..1e7,
            0.0f64..=100.0,
        )
            .prop_map(|(name, total, calls, avg, pct)| KernelStatRow {
                name: name.trim().to_string(),
                total_time_ns: total,
                calls,
                avg_ns: avg,
                pct_time: pct,
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_fixpoint(rows in prop::collection::vec(row_strategy(), 0..30), k in 0usize..4) {
            let kind = ReportKind::ALL[k];
            let text = rows_to_csv(kind, &rows);
            let parsed = parse_stats_csv("generic.csv", &text);
            prop_assert_eq!(parsed.rows(kind), rows.as_slice());
            prop_assert_eq!(rows_to_csv(kind, parsed.rows(kind)), text);
        }

        #[test]
        fn bundle_respects_budgets(
            n_rows in 0usize..80,
            n_images in 0usize..8,
            max_rows in 1usize..30,
            max_images in 0usize..5,
        ) {
            let dir = tempfile::tempdir().unwrap();
            let mut inputs = EvidenceInputs::default();
            inputs.reports.tables.insert(ReportKind::ApiSummary, rows(n_rows));
            for i in 0..n_images {
                let p = dir.path().join(format!("{}_{i}.png", VIEW_ORDER[i % 3]));
                fs::write(&p, format!("img{i}")).unwrap();
                inputs.screenshots.push(p);
            }
            match build_bundle(&inputs, BundleBudget { max_rows, max_images }, Backend::Cuda) {
                Ok(b) => {
                    let imgs = b.items.iter().filter(|i| i.kind == EvidenceKind::Image).count();
                    prop_assert!(imgs <= max_images);
                    for item in &b.items {
                        if let EvidencePayload::Text(t) = &item.payload {
                            prop_assert!(t.lines().count() <= max_rows + 1);
                        }
                    }
                    let digests: HashSet<_> = b.items.iter().map(|i| &i.digest).collect();
                    prop_assert_eq!(digests.len(), b.items.len());
                }
                Err(_) => prop_assert!(n_rows == 0 && (n_images == 0 || max_images == 0)),
            }
        }
    }
}
