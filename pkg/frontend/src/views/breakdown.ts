// Breakdown inspector: the selected confusion cell's videos, and for a
// selected video the per-feature matching degrees of every class, exactly
// as the API reported them.

import type { EvaluationReport, VideoReport } from "../api.js";
import { exact, videosInCell, type SelectedCell } from "../state.js";

export function renderBreakdown(
  el: HTMLElement,
  report: EvaluationReport | null,
  cell: SelectedCell | null,
  selectedVideo: string | null,
  onVideo: (videoId: string) => void,
): void {
  el.textContent = "";
  if (!report || !cell) {
    el.textContent = "click a confusion cell to inspect its videos";
    return;
  }
  const caption = document.createElement("div");
  caption.className = "panel-caption";
  caption.textContent =
    `true ${cell.truth} predicted as ${cell.predicted} · revision ${exact(report.revision)}`;
  el.appendChild(caption);

  const videos = videosInCell(report, cell.truth, cell.predicted);
  if (videos.length === 0) {
    const empty = document.createElement("div");
    empty.textContent = "no videos in this cell";
    el.appendChild(empty);
    return;
  }
  const list = document.createElement("ul");
  list.className = "video-list";
  for (const video of videos) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.type = "button";
    button.dataset.videoId = video.video_id;
    button.textContent = video.video_id;
    if (video.video_id === selectedVideo) {
      button.classList.add("selected");
    }
    button.addEventListener("click", () => onVideo(video.video_id));
    item.appendChild(button);
    list.appendChild(item);
  }
  el.appendChild(list);

  const chosen = videos.find((v) => v.video_id === selectedVideo);
  if (chosen) {
    el.appendChild(renderVideoDetail(chosen));
  }
}

function renderVideoDetail(video: VideoReport): HTMLElement {
  const box = document.createElement("div");
  box.className = "video-detail";
  box.dataset.role = "video-detail";
  const title = document.createElement("h4");
  title.textContent = `${video.video_id} — per-feature degrees`;
  box.appendChild(title);
  const table = document.createElement("table");
  const head = table.insertRow();
  for (const column of ["class", "feature", "weight", "kind", "degree"]) {
    const th = document.createElement("th");
    th.textContent = column;
    head.appendChild(th);
  }
  for (const breakdown of video.ranking) {
    for (const feature of breakdown.features) {
      const row = table.insertRow();
      row.insertCell().textContent = breakdown.class_label;
      row.insertCell().textContent = feature.text;
      row.insertCell().textContent = exact(feature.weight);
      row.insertCell().textContent = feature.kind;
      const degree = row.insertCell();
      degree.textContent = exact(feature.degree);
      degree.dataset.degreeOf = `${breakdown.class_label}:${feature.text}`;
    }
    const summary = table.insertRow();
    summary.className = "class-summary";
    summary.insertCell().textContent = breakdown.class_label;
    const label = summary.insertCell();
    label.colSpan = 3;
    label.textContent = "combined score";
    const score = summary.insertCell();
    score.textContent = exact(breakdown.combined_score);
    score.dataset.combinedOf = breakdown.class_label;
  }
  box.appendChild(table);
  return box;
}
