import { describe, expect, it } from 'vitest'

import {
  canAdvance,
  canDecide,
  canGiveFeedback,
  initialView,
  withAdvance,
  withDecision,
  withEquity,
  withError,
  withFeedback,
  withProfile,
  withSession,
} from '../src/state'
import { defaultScript } from './fake-server'

const script = defaultScript()

describe('session view-model', () => {
  it('blocks decisions until a preference is accepted', () => {
    let view = withSession(initialView(), 'sess-1', '2024-01-02')
    expect(canDecide(view)).toBe(false)
    view = withProfile(view, { kind: 'Cons', buy_fraction: 0.5, sell_fraction: 1.0 })
    expect(canDecide(view)).toBe(true)
  })

  it('blocks feedback and advance until a decision is pending', () => {
    let view = withSession(initialView(), 'sess-1', '2024-01-02')
    expect(canAdvance(view)).toBe(false)
    expect(canGiveFeedback(view)).toBe(false)
    view = withDecision(view, script.decisions[0]!)
    expect(canAdvance(view)).toBe(true)
    expect(canGiveFeedback(view)).toBe(true)
  })

  it('decision response seeds the weights panel verbatim', () => {
    const view = withDecision(initialView(), script.decisions[0]!)
    expect(view.weights).toEqual(script.decisions[0]!.weights)
  })

  it('feedback replaces weights with the server body, never edits them', () => {
    let view = withDecision(initialView(), script.decisions[0]!)
    view = withFeedback(view, script.feedbacks[0]!)
    expect(view.weights).toEqual(script.feedbacks[0]!.weights)
  })

  it('advance consumes the decision and moves the cursor', () => {
    let view = withDecision(withSession(initialView(), 's', '2024-01-02'), script.decisions[0]!)
    view = withAdvance(view, script.advances[0]!)
    expect(view.decision).toBeNull()
    expect(view.cursor).toBe(script.advances[0]!.cursor)
    expect(canAdvance(view)).toBe(false)
  })

  it('equity points are stored exactly as served', () => {
    const view = withEquity(initialView(), script.equities[2]!)
    expect(view.equityPoints).toEqual(script.equities[2]!.points)
  })

  it('errors are kept for the banner and cleared by the next success', () => {
    let view = withError(initialView(), { code: 'no_preference', message: 'nope' })
    expect(view.error?.code).toBe('no_preference')
    view = withProfile(view, { kind: 'Agg', buy_fraction: 1.0, sell_fraction: 0.3 })
    expect(view.error).toBeNull()
  })

  it('busy view disables every mutation control', () => {
    let view = withProfile(withSession(initialView(), 's', 'd'), {
      kind: 'Cons',
      buy_fraction: 0.5,
      sell_fraction: 1.0,
    })
    view = withDecision(view, script.decisions[0]!)
    const busy = { ...view, busy: true }
    expect(canDecide(busy)).toBe(false)
    expect(canAdvance(busy)).toBe(false)
    expect(canGiveFeedback(busy)).toBe(false)
  })
})
