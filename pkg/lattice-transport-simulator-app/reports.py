# reports.py - PDF report generation

import math
from datetime import datetime

import pandas as pd
from reportlab.lib import colors
from reportlab.lib.pagesizes import letter
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from analysis_engine import AnalysisEngine
from config import PDF_TEMPLATES
from utils import format_depths


def create_pdf_styles():
    """Create custom PDF styles"""
    styles = getSampleStyleSheet()

    title_style = ParagraphStyle(
        'CustomTitle',
        parent=styles['Heading1'],
        fontSize=22,
        textColor=colors.darkblue,
        alignment=1,
        spaceAfter=24
    )

    heading_style = ParagraphStyle(
        'CustomHeading',
        parent=styles['Heading2'],
        fontSize=14,
        textColor=colors.darkblue,
        spaceBefore=18,
        spaceAfter=10
    )

    return styles, title_style, heading_style


def generate_executive_summary(summary: dict, df: pd.DataFrame, threshold: float) -> str:
    """Lattice parameters, characteristic scales and breakdown time as report text"""
    lines = [
        f"<b>Lattice:</b> {summary.get('lattice') or 'custom'}",
        f"<b>Depths:</b> {format_depths(summary['depths_E_R'])} x {summary.get('depth_scale', 1.0):g}",
        f"<b>omega_x, omega_y:</b> {summary['omega_x']:.6g}, {summary['omega_y']:.6g} (hbar = m = k_L = 1)",
        f"<b>T_x:</b> {summary['T_x']:.6g} &nbsp; <b>l_x:</b> {summary['l_x']:.6g}",
    ]
    if "max_lattice_accel" in summary:
        lines.append(f"<b>Lattice acceleration ceiling:</b> {summary['max_lattice_accel']:.6g} l_x/T_x^2")
    if "d_actual_x" in df and not df["d_actual_x"].dropna().empty:
        lines.append(f"<b>Distance:</b> {df['d_actual_x'].dropna().iloc[0]:.4f} l_x (snapped to lattice periods)")
    if "t_f_over_Tx" in df:
        metrics = AnalysisEngine.calculate_curve_metrics(df, threshold)
        t_break = metrics["breakdown_t_f"]
        lines.append(f"<b>Breakdown time (F = {threshold:g}):</b> "
                     + (f"{t_break:.4f} T_x" if t_break is not None else "not bracketed"))
    elif "magnitude_pct" in df:
        robustness = AnalysisEngine.robustness_summary(df)
        lines.append(f"<b>Worst fidelity:</b> {robustness['worst_fidelity']:.6f}")
        if "max_loss" in robustness:
            lines.append(f"<b>Baseline fidelity:</b> {robustness['baseline_fidelity']:.6f} "
                         f"&nbsp; <b>Largest loss:</b> {robustness['max_loss']:.3g}")
    return "<br/>".join(lines)


def generate_curve_table(df: pd.DataFrame) -> list:
    columns = [c for c in df.columns if c != "error"]
    rows = [columns]
    for _, record in df[columns].iterrows():
        rows.append([_format_cell(record[c]) for c in columns])
    return rows


def _format_cell(value) -> str:
    if isinstance(value, float):
        return "n/a" if math.isnan(value) else f"{value:.6g}"
    return str(value)


def generate_pdf_report(template_key: str, df: pd.DataFrame, summary: dict, out_path: str,
                        threshold: float = 0.9) -> str:
    """Write a PDF report for a sweep, figure panel or robustness table"""
    template = PDF_TEMPLATES[template_key]
    doc = SimpleDocTemplate(out_path, pagesize=letter, topMargin=0.5*inch, bottomMargin=0.5*inch)
    story = []
    styles, title_style, heading_style = create_pdf_styles()

    story.append(Paragraph(template["title"], title_style))
    story.append(Paragraph(template["subtitle"], styles['Normal']))
    story.append(Paragraph(f"Generated on: {datetime.now().strftime('%B %d, %Y at %I:%M %p')}", styles['Normal']))
    story.append(Spacer(1, 20))

    for section in template["sections"]:
        if section == "executive_summary":
            story.append(Paragraph("Executive Summary", heading_style))
            story.append(Paragraph(generate_executive_summary(summary, df, threshold), styles['Normal']))
            story.append(Spacer(1, 20))

        elif section == "curve_table":
            story.append(Paragraph("Results", heading_style))
            data_table = Table(generate_curve_table(df))
            data_table.setStyle(TableStyle([
                ('BACKGROUND', (0, 0), (-1, 0), colors.grey),
                ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
                ('ALIGN', (0, 0), (-1, -1), 'CENTER'),
                ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
                ('FONTSIZE', (0, 0), (-1, -1), 7),
                ('BOTTOMPADDING', (0, 0), (-1, 0), 8),
                ('BACKGROUND', (0, 1), (-1, -1), colors.beige),
                ('GRID', (0, 0), (-1, -1), 1, colors.black)
            ]))
            story.append(data_table)
            story.append(Spacer(1, 20))

        elif section == "insights":
            story.append(Paragraph("Key Insights", heading_style))
            insights = AnalysisEngine.generate_curve_insights(df, threshold)
            story.append(Paragraph("<br/>".join(f"• {line}" for line in insights), styles['Normal']))

    doc.build(story)
    return out_path
