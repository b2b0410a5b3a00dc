use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crosswalk_core::eval::{map_range_images, read_obb_labels, EvalImage};
use crosswalk_core::export::{
    classify_all, detection_to_record, read_road_network, sidecar_path, write_geojson_like, write_shapefile,
    ClassifyThresholds,
};
use crosswalk_core::imagery::{load_raster, plan_tiles, read_world_file};
use crosswalk_core::nn::{
    cosine_lr, dual_branch_sppf, max_pool2d, read_weight_file, soft_cbam, soft_pool2d, write_weight_file,
    ModuleWeights, Tensor4,
};
use crosswalk_core::pipeline::{
    format_detections, process_image, read_detections, sort_for_output, FixtureDetector,
};
use crosswalk_core::{Detection, DetectorBackend, GeoTransform, GroundTruthBox, PipelineConfig, TileSpec};

use crate::external::ExternalDetector;
use crate::settings::Settings;
use crate::Failure;

/// Writes `text` to the `output` setting, or stdout when unset.
fn emit(settings: &Settings, text: &str) -> Result<(), Failure> {
    match settings.path("output") {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn tile_spec(s: &Settings) -> Result<TileSpec, Failure> {
    let patch = s.get_or("patch", TileSpec::DEFAULT_PATCH)?;
    let overlap = s.get_or("overlap", TileSpec::DEFAULT_OVERLAP)?;
    Ok(TileSpec::new(patch, overlap)?)
}

fn pipeline_config(s: &Settings) -> Result<PipelineConfig, Failure> {
    let d = PipelineConfig::default();
    let cfg = PipelineConfig {
        conf_threshold: s.get_or("conf", d.conf_threshold)?,
        nms_iou: s.get_or("nms_iou", d.nms_iou)?,
        class_agnostic_nms: s.flag("class_agnostic", d.class_agnostic_nms)?,
        grayscale: s.flag("grayscale", d.grayscale)?,
        tile_spec: tile_spec(s)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Raster extent from explicit `width`/`height`, else from the raster header.
fn image_size(s: &Settings) -> Result<(usize, usize), Failure> {
    if let (Some(w), Some(h)) = (s.get::<usize>("width")?, s.get::<usize>("height")?) {
        if w == 0 || h == 0 {
            return Err(Failure::input("width and height must be positive"));
        }
        return Ok((w, h));
    }
    let input = s.existing_path("input")?;
    header_size(&input)
}

fn header_size(path: &Path) -> Result<(usize, usize), Failure> {
    let (w, h) = image::image_dimensions(path)
        .map_err(|e| Failure::input(format!("cannot read raster header {}: {e}", path.display())))?;
    Ok((w as usize, h as usize))
}

pub fn tile(s: &Settings) -> Result<(), Failure> {
    let spec = tile_spec(s)?;
    let (w, h) = image_size(s)?;
    let windows = plan_tiles(w, h, spec);
    let mut out = String::from("# tile_index origin_col origin_row width height\n");
    for win in &windows {
        let _ = writeln!(out, "{} {} {} {} {}", win.tile_index, win.origin_col, win.origin_row, win.width, win.height);
    }
    info!("{} tiles for a {w}x{h} raster", windows.len());
    emit(s, &out)
}

fn backend(s: &Settings) -> Result<Box<dyn DetectorBackend>, Failure> {
    match s.raw("backend").unwrap_or("fixture") {
        "fixture" => {
            let rules = read_detections(s.existing_path("rules")?)?;
            info!("fixture backend with {} rules", rules.len());
            Ok(Box::new(FixtureDetector::new(rules)))
        }
        "external" => Ok(Box::new(ExternalDetector::new(s.existing_path("model")?))),
        other => Err(Failure::input(format!("unknown backend `{other}` (expected fixture or external)"))),
    }
}

pub fn detect(s: &Settings) -> Result<(), Failure> {
    let cfg = pipeline_config(s)?;
    let workers: usize = s.get_or("workers", 1)?;
    if workers == 0 {
        return Err(Failure::input("workers must be at least 1"));
    }
    let input = s.existing_path("input")?;
    let backend = backend(s)?;
    let image = load_raster(&input)?;
    let out = process_image(&image, None, backend.as_ref(), &cfg, workers)?;
    let p = &out.provenance;
    info!(
        "{} tiles, {} workers: {} raw -> {} merged detections in {:.3}s (tiles {:.3}s, merge {:.3}s)",
        p.tiles,
        p.workers,
        p.raw_detections,
        p.merged_detections,
        p.wall_time.as_secs_f64(),
        p.tile_time.as_secs_f64(),
        p.merge_time.as_secs_f64()
    );
    let mut dets = out.detections;
    sort_for_output(&mut dets);
    emit(s, &format_detections(&dets))
}

/// `x.png` -> `x.pgw`, `x.pngw`, `x.wld`.
fn world_file_candidates(raster: &Path) -> Vec<PathBuf> {
    let ext = raster.extension().and_then(|e| e.to_str()).unwrap_or("");
    let mut out = Vec::new();
    if ext.len() >= 2 {
        let short = format!("{}{}w", &ext[..1], &ext[ext.len() - 1..]);
        out.push(raster.with_extension(short));
    }
    if !ext.is_empty() {
        out.push(raster.with_extension(format!("{ext}w")));
    }
    out.push(raster.with_extension("wld"));
    out
}

fn geotransform(s: &Settings) -> Result<GeoTransform, Failure> {
    if s.flag("pixel_space", false)? {
        return Ok(GeoTransform::identity());
    }
    if let Some(path) = s.path("world_file") {
        if !path.exists() {
            return Err(Failure::input(format!("world file {} does not exist", path.display())));
        }
        return Ok(read_world_file(&path)?);
    }
    if let Some(input) = s.path("input") {
        if let Some(found) = world_file_candidates(&input).into_iter().find(|p| p.exists()) {
            info!("using world file {}", found.display());
            return Ok(read_world_file(&found)?);
        }
    }
    Err(Failure::input(
        "world coordinates need a world file (--world-file); pass --pixel-space to export pixel coordinates",
    ))
}

pub fn export(s: &Settings) -> Result<(), Failure> {
    let dets = read_detections(s.existing_path("detections")?)?;
    let stem = s.require_path("output")?;
    let gt = geotransform(s)?;
    let crs = match s.path("crs") {
        Some(p) => std::fs::read_to_string(&p).map_err(|e| Failure::input(format!("cannot read crs {}: {e}", p.display())))?,
        None => String::new(),
    };
    let network = s.path("roads").map(read_road_network).transpose()?;
    let d = ClassifyThresholds::default();
    let thresholds = ClassifyThresholds {
        driveway: s.get_or("d_driveway", d.driveway)?,
        intersection: s.get_or("d_intersection", d.intersection)?,
        road: s.get_or("d_road", d.road)?,
    };

    let mut records: Vec<_> = dets.iter().map(|d| detection_to_record(d, &gt)).collect();
    if let Some(net) = &network {
        classify_all(&mut records, net, &thresholds);
    }
    write_shapefile(&records, &stem, crs.trim())?;
    write_geojson_like(&records, sidecar_path(&stem, "geojson"))?;
    info!("wrote {} records to {}.shp", records.len(), stem.display());
    Ok(())
}

fn text_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::input(format!("cannot list {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    Ok(files)
}

fn stem_of(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Size of the image called `stem`: explicit width/height, the input raster,
/// or a same-stem raster inside an input directory.
fn size_for(s: &Settings, stem: &str) -> Result<(usize, usize), Failure> {
    if let (Some(w), Some(h)) = (s.get::<usize>("width")?, s.get::<usize>("height")?) {
        return Ok((w, h));
    }
    let input = s
        .path("input")
        .ok_or_else(|| Failure::input("label coordinates are normalised: give --width/--height or --input"))?;
    if input.is_dir() {
        let entries = std::fs::read_dir(&input).map_err(|e| Failure::input(format!("cannot list {}: {e}", input.display())))?;
        let mut matches: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && stem_of(p) == stem && p.extension().is_some_and(|e| e != "txt"))
            .collect();
        matches.sort();
        let first = matches
            .into_iter()
            .find(|p| image::ImageFormat::from_path(p).is_ok())
            .ok_or_else(|| Failure::input(format!("no raster named {stem}.* in {}", input.display())))?;
        return header_size(&first);
    }
    header_size(&input)
}

pub fn evaluate(s: &Settings) -> Result<(), Failure> {
    let det_path = s.existing_path("detections")?;
    let label_path = s.existing_path("labels")?;

    // (stem, label file, detection file or none)
    let pairs: Vec<(String, PathBuf, Option<PathBuf>)> = match (det_path.is_dir(), label_path.is_dir()) {
        (_, false) => vec![(stem_of(&label_path), label_path.clone(), Some(det_path.clone()))],
        (true, true) => text_files(&label_path)?
            .into_iter()
            .map(|l| {
                let stem = stem_of(&l);
                let d = det_path.join(format!("{stem}.txt"));
                (stem, l, d.exists().then_some(d))
            })
            .collect(),
        (false, true) => {
            let stem = stem_of(&det_path);
            let labels = label_path.join(format!("{stem}.txt"));
            let only = text_files(&label_path)?;
            let chosen = if labels.exists() {
                labels
            } else if only.len() == 1 {
                only[0].clone()
            } else {
                return Err(Failure::input(format!(
                    "no label file {stem}.txt in {}",
                    label_path.display()
                )));
            };
            vec![(stem, chosen, Some(det_path.clone()))]
        }
    };
    if pairs.is_empty() {
        return Err(Failure::input(format!("no label files in {}", label_path.display())));
    }

    let mut data: Vec<(Vec<Detection>, Vec<GroundTruthBox>)> = Vec::with_capacity(pairs.len());
    for (stem, labels, dets) in &pairs {
        let (w, h) = size_for(s, stem)?;
        let gts = read_obb_labels(labels, w, h)?;
        let dets = match dets {
            Some(p) => read_detections(p)?,
            None => Vec::new(),
        };
        data.push((dets, gts));
    }
    let images: Vec<EvalImage<'_>> = data
        .iter()
        .map(|(d, g)| EvalImage { detections: d, ground_truth: g })
        .collect();
    let report = map_range_images(&images)?;
    emit(s, &report.to_text())
}

fn random_tensor(shape: [usize; 4], rng: &mut ChaCha8Rng) -> Tensor4 {
    Tensor4::from_fn(shape, |_, _, _, _| rng.gen_range(-2.0..2.0))
}

struct Checks {
    lines: String,
    failed: Vec<&'static str>,
}

impl Checks {
    fn record(&mut self, name: &'static str, ok: bool, detail: String) {
        let _ = writeln!(self.lines, "check {name}: {} ({detail})", if ok { "pass" } else { "FAIL" });
        if !ok {
            self.failed.push(name);
        }
    }
}

pub fn demo_modules(s: &Settings) -> Result<(), Failure> {
    let seed: u64 = s.get_or("seed", 0)?;
    let size: usize = s.get_or("size", 16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = match s.path("weights") {
        Some(p) => read_weight_file(&p)?,
        None => ModuleWeights::seeded(s.get_or("channels", 64)?, &mut rng)?,
    };
    let channels = weights.sppf.max_branch.pre_conv.in_channels();
    weights.validate(channels)?;
    if size == 0 {
        return Err(Failure::input("size must be positive"));
    }
    if let Some(p) = s.path("save_weights") {
        write_weight_file(&p, &weights)?;
    }

    let shape = [1, channels, size, size];
    let x = random_tensor(shape, &mut rng);
    let mut report = String::new();
    let _ = writeln!(report, "seed: {seed}");
    let _ = writeln!(report, "input shape: {shape:?}");

    let y = dual_branch_sppf(&x, &weights.sppf).map_err(|e| Failure::invariant(format!("sppf: {e}")))?;
    let z = soft_cbam(&y, &weights.cbam).map_err(|e| Failure::invariant(format!("soft-cbam: {e}")))?;
    let _ = writeln!(report, "sppf output shape: {:?}", y.shape());
    let _ = writeln!(report, "soft-cbam output shape: {:?}", z.shape());

    let mut checks = Checks { lines: String::new(), failed: Vec::new() };
    checks.record("sppf_shape", y.shape() == shape, format!("{:?}", y.shape()));
    checks.record("sppf_finite", y.data().iter().all(|v| v.is_finite()), "all outputs finite".into());
    checks.record("cbam_shape", z.shape() == y.shape(), format!("{:?}", z.shape()));
    let worst = y.data().iter().zip(z.data()).map(|(a, b)| b.abs() - a.abs()).fold(f64::NEG_INFINITY, f64::max);
    checks.record("cbam_gate_bound", worst <= 0.0, format!("max(|out| - |in|) = {worst:.3e}"));
    let zero = soft_cbam(&Tensor4::zeros(shape), &weights.cbam)?;
    checks.record("cbam_zero_input", zero.data().iter().all(|v| *v == 0.0), "zero in, zero out".into());

    let soft = soft_pool2d(&x, 5)?;
    let hi = max_pool2d(&x, 5)?;
    let lo = max_pool2d(&x.map(|v| -v), 5)?.map(|v| -v);
    let within = soft
        .data()
        .iter()
        .zip(hi.data().iter().zip(lo.data()))
        .all(|(v, (h, l))| *v <= *h + 1e-12 && *v >= *l - 1e-12);
    checks.record("softpool_bounds", within, "window min <= softpool <= window max".into());
    let shifted = soft_pool2d(&x.map(|v| v + 3.0), 5)?.map(|v| v - 3.0);
    let drift = shifted.max_abs_diff(&soft);
    checks.record("softpool_shift", drift <= 1e-9, format!("max drift {drift:.3e}"));

    let again = soft_cbam(&dual_branch_sppf(&x, &weights.sppf)?, &weights.cbam)?;
    checks.record("deterministic", again == z, "repeat forward pass is identical".into());

    let (lr_max, lr_min, total) = (0.01, 0.0001, 300u64);
    let first = cosine_lr(0, total, lr_max, lr_min)?;
    let last = cosine_lr(total, total, lr_max, lr_min)?;
    let mid = cosine_lr(total / 2, total, lr_max, lr_min)?;
    checks.record(
        "cosine_lr",
        first == lr_max && last == lr_min && mid == 0.5 * (lr_max + lr_min),
        format!("lr(0) = {first}, lr(T/2) = {mid}, lr(T) = {last}"),
    );

    report.push_str(&checks.lines);
    print!("{report}");
    if checks.failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::invariant(format!("invariant check(s) failed: {}", checks.failed.join(", "))))
    }
}
